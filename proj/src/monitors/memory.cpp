// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"
#include "wprobe/frame_accessor.hpp"
#include "wprobe/opcodes.hpp"
#include "wprobe/probe_library.hpp"

namespace wprobe::monitors
{
namespace
{
class MemoryMonitor final : public Monitor
{
public:
    std::string_view name() const noexcept override { return "memory"; }

    void on_load(Engine& engine, Module& module) override
    {
        const Listing listing{module};
        for (const auto& lf : listing.funcs)
            for (const auto& insn : lf.insns)
            {
                const bool load = is_load(insn.opcode);
                if (!load && !is_store(insn.opcode))
                    continue;
                const uint32_t width = opcode_info(insn.opcode).access_width;
                const uint64_t offset = static_cast<uint64_t>(insn.immediates.at(1));
                const CodeLocation loc{module.id, lf.index, insn.pc};
                auto p = make_probe([this, load, width, offset, loc](ProbeContext& ctx) {
                    const auto frame = ctx.frame();
                    Access a{loc.func_index, loc.pc, !load, width, 0, std::nullopt};
                    if (load)
                        a.addr = frame->get_operand(0).as_u32() + offset;
                    else
                    {
                        a.value = frame->get_operand(0);
                        a.addr = frame->get_operand(1).as_u32() + offset;
                    }
                    log_.push_back(a);
                    if (load)
                        pending_load_ = log_.size() - 1;
                });
                engine.insert_probe(loc, p);
                probes_.push_back(std::move(p));
                if (load)
                    hooks_.push_back(after_instruction(engine, loc, make_probe([this](ProbeContext& ctx) {
                        if (pending_load_ < log_.size())
                            log_[pending_load_].value = ctx.frame()->get_operand(0);
                        pending_load_ = SIZE_MAX;
                    })));
            }
    }

    void on_unload() override { hooks_.clear(); }

    Report report() const override
    {
        Report r{"memory", {}, {}};
        for (const auto& a : log_)
        {
            std::string v = "width=" + std::to_string(a.width) + " addr=" + std::to_string(a.addr) +
                            " value=" + (a.value ? to_string(*a.value) : std::string("?"));
            r.text += "func " + std::to_string(a.func) + " pc " + std::to_string(a.pc) + ' ' +
                      (a.store ? "store " : "load  ") + v + '\n';
            r.rows.push_back({"memory", a.func, a.pc, a.store ? "store" : "load", std::move(v)});
        }
        return r;
    }

private:
    struct Access
    {
        uint32_t func;
        uint32_t pc;
        bool store;
        uint32_t width;
        uint64_t addr;
        std::optional<Value> value;
    };

    std::vector<Access> log_;
    size_t pending_load_ = SIZE_MAX;
    std::vector<ProbePtr> probes_;
    std::vector<std::unique_ptr<AfterInstructionHook>> hooks_;
};
}  // namespace

std::unique_ptr<Monitor> make_memory()
{
    return std::make_unique<MemoryMonitor>();
}
}  // namespace wprobe::monitors
