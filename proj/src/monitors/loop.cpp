// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"
#include "wprobe/opcodes.hpp"

namespace wprobe::monitors
{
namespace
{
/// An iteration is one execution of the first instruction inside the loop,
/// so first entry and every backedge count.
class LoopMonitor final : public Monitor
{
public:
    std::string_view name() const noexcept override { return "loop"; }

    void on_load(Engine& engine, Module& module) override
    {
        const Listing listing{module};
        for (const auto& lf : listing.funcs)
            for (const auto& insn : lf.insns)
            {
                if (insn.opcode != op::loop)
                    continue;
                Site s{lf.index, insn.pc, insn.pc + insn.length, std::make_shared<CountProbe>()};
                engine.insert_probe(CodeLocation{module.id, s.func, s.header}, s.counter);
                sites_.push_back(std::move(s));
            }
    }

    Report report() const override
    {
        Report r{"loop", {}, {}};
        for (const auto& s : sites_)
        {
            r.rows.push_back({"loop", s.func, s.header, "iterations", std::to_string(s.counter->count)});
            r.text += "func " + std::to_string(s.func) + " loop at pc " + std::to_string(s.loop_pc) + ": " +
                      std::to_string(s.counter->count) + " iterations\n";
        }
        return r;
    }

private:
    struct Site
    {
        uint32_t func;
        uint32_t loop_pc;
        uint32_t header;
        std::shared_ptr<CountProbe> counter;
    };
    std::vector<Site> sites_;
};
}  // namespace

std::unique_ptr<Monitor> make_loop()
{
    return std::make_unique<LoopMonitor>();
}
}  // namespace wprobe::monitors
