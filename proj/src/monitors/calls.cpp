// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"
#include "wprobe/frame_accessor.hpp"
#include "wprobe/opcodes.hpp"
#include <map>

namespace wprobe::monitors
{
namespace
{
constexpr uint32_t undefined_target = UINT32_MAX;

class CallsMonitor final : public Monitor
{
public:
    std::string_view name() const noexcept override { return "calls"; }

    void on_load(Engine& engine, Module& module) override
    {
        const Listing listing{module};
        for (const auto& lf : listing.funcs)
            for (const auto& insn : lf.insns)
            {
                const CodeLocation loc{module.id, lf.index, insn.pc};
                if (insn.opcode == op::call)
                {
                    auto c = std::make_shared<CountProbe>();
                    direct_.push_back({lf.index, insn.pc, static_cast<uint32_t>(insn.immediates.at(0)), c});
                    engine.insert_probe(loc, c);
                }
                else if (insn.opcode == op::call_indirect)
                {
                    auto p = make_probe([this](ProbeContext& ctx) {
                        const auto& table = ctx.execution().instance().table;
                        const uint32_t slot = ctx.frame()->get_operand(0).as_u32();
                        const uint32_t target =
                            slot < table.size() && table[slot] != null_element ? table[slot] : undefined_target;
                        ++indirect_[{ctx.location().func_index, ctx.location().pc, target}];
                    });
                    indirect_probes_.push_back(p);
                    engine.insert_probe(loc, p);
                }
            }
    }

    Report report() const override
    {
        std::map<std::tuple<uint32_t, uint32_t, uint32_t>, uint64_t> edges = indirect_;
        for (const auto& d : direct_)
            if (d.counter->count)
                edges[{d.func, d.pc, d.callee}] += d.counter->count;
        Report r{"calls", {}, {}};
        for (const auto& [key, n] : edges)
        {
            const auto [func, pc, callee] = key;
            const std::string target = callee == undefined_target ? "undefined" : "f" + std::to_string(callee);
            r.rows.push_back({"calls", func, pc, target, std::to_string(n)});
            r.text += "f" + std::to_string(func) + "@" + std::to_string(pc) + " -> " + target + ": " +
                      std::to_string(n) + '\n';
        }
        return r;
    }

private:
    struct Direct
    {
        uint32_t func;
        uint32_t pc;
        uint32_t callee;
        std::shared_ptr<CountProbe> counter;
    };

    std::vector<Direct> direct_;
    std::vector<ProbePtr> indirect_probes_;
    std::map<std::tuple<uint32_t, uint32_t, uint32_t>, uint64_t> indirect_;
};
}  // namespace

std::unique_ptr<Monitor> make_calls()
{
    return std::make_unique<CallsMonitor>();
}
}  // namespace wprobe::monitors
