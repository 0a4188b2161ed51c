// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"
#include "wprobe/frame_accessor.hpp"
#include <ostream>

namespace wprobe::monitors
{
namespace
{
// One line per instruction:
//   <2*(depth-1) spaces>[depth] f<func>+<pc> <instruction> ; stack=[bottom, ..., top]
class TraceMonitor final : public Monitor
{
public:
    explicit TraceMonitor(std::ostream* out) : out_{out} {}

    std::string_view name() const noexcept override { return "trace"; }

    void on_load(Engine& engine, Module& module) override
    {
        module_ = &module;
        listing_ = std::make_unique<Listing>(module);
        probe_ = make_probe([this](ProbeContext& ctx) { fire(ctx); });
        engine.insert_global_probe(probe_);
    }

    Report report() const override
    {
        Report r{"trace", "trace: " + std::to_string(lines_) + " instructions executed\n", {}};
        r.rows.push_back({"trace", std::nullopt, std::nullopt, "instructions", std::to_string(lines_)});
        return r;
    }

private:
    void fire(ProbeContext& ctx)
    {
        const auto& loc = ctx.location();
        if (loc.module_id != module_->id)
            return;
        ++lines_;
        if (!out_)
            return;
        const auto frame = ctx.frame();
        const auto& lf = listing_->funcs[loc.func_index - module_->num_imported_funcs()];
        std::string line(2 * (frame->depth() - 1), ' ');
        line += '[' + std::to_string(frame->depth()) + "] f" + std::to_string(loc.func_index) + '+' +
                std::to_string(loc.pc) + ' ' + format_instruction(lf.insns[lf.at[loc.pc]]) + " ; stack=[";
        const uint32_t n = frame->num_operands();
        for (uint32_t k = n; k-- > 0;)
        {
            line += to_string(frame->get_operand(k));
            if (k)
                line += ", ";
        }
        line += "]\n";
        *out_ << line;
    }

    std::ostream* out_;
    const Module* module_ = nullptr;
    std::unique_ptr<Listing> listing_;
    ProbePtr probe_;
    uint64_t lines_ = 0;
};
}  // namespace

std::unique_ptr<Monitor> make_trace(std::ostream* out)
{
    return std::make_unique<TraceMonitor>(out);
}
}  // namespace wprobe::monitors
