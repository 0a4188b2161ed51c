// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"
#include <algorithm>
#include <numeric>

namespace wprobe::monitors
{
namespace
{
/// Same job as CountProbe but dispatched like any other probe.
class GenericCounter final : public Probe
{
public:
    void fire(ProbeContext&) override { ++count; }
    uint64_t count = 0;
};

class HotnessMonitor final : public Monitor
{
public:
    enum class Mode
    {
        counter,
        generic,
        global,
    };

    explicit HotnessMonitor(Mode mode) : mode_{mode} {}

    std::string_view name() const noexcept override { return "hotness"; }

    void on_load(Engine& engine, Module& module) override
    {
        module_ = &module;
        listing_ = std::make_unique<Listing>(module);
        for (const auto& lf : listing_->funcs)
        {
            auto& fh = funcs_.emplace_back();
            fh.counts.assign(lf.at.size(), 0);
            if (mode_ == Mode::global)
                continue;
            for (const auto& insn : lf.insns)
            {
                ProbePtr p;
                if (mode_ == Mode::counter)
                    p = fh.counters.emplace_back(std::make_shared<CountProbe>());
                else
                    p = fh.generics.emplace_back(std::make_shared<GenericCounter>());
                engine.insert_probe(CodeLocation{module.id, lf.index, insn.pc}, p);
            }
        }
        if (mode_ == Mode::global)
        {
            const uint32_t imports = module.num_imported_funcs();
            const uint32_t id = module.id;
            global_ = make_probe([this, imports, id](ProbeContext& ctx) {
                const auto& loc = ctx.location();
                if (loc.module_id == id)
                    ++funcs_[loc.func_index - imports].counts[loc.pc];
            });
            engine.insert_global_probe(global_);
        }
    }

    Report report() const override
    {
        Report r{"hotness", {}, {}};
        std::vector<std::pair<uint64_t, size_t>> order;
        std::vector<std::vector<uint64_t>> per_insn(funcs_.size());
        for (size_t fi = 0; fi < funcs_.size(); ++fi)
        {
            const auto& lf = listing_->funcs[fi];
            for (size_t i = 0; i < lf.insns.size(); ++i)
                per_insn[fi].push_back(count(fi, i));
            for (size_t i = 0; i < lf.insns.size(); ++i)
                r.rows.push_back({"hotness", lf.index, lf.insns[i].pc, format_instruction(lf.insns[i]),
                    std::to_string(per_insn[fi][i])});
            order.emplace_back(std::accumulate(per_insn[fi].begin(), per_insn[fi].end(), uint64_t{0}), fi);
        }
        std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

        for (const auto& [total, fi] : order)
        {
            const auto& lf = listing_->funcs[fi];
            const uint64_t peak = per_insn[fi].empty() ? 0 : *std::max_element(per_insn[fi].begin(), per_insn[fi].end());
            r.text += "func " + std::to_string(lf.index) + ": " + std::to_string(total) + " instructions executed\n";
            for (size_t i = 0; i < lf.insns.size(); ++i)
            {
                const uint64_t c = per_insn[fi][i];
                const size_t bar = peak ? static_cast<size_t>((c * 20 + peak - 1) / peak) : 0;
                char head[48];
                std::snprintf(head, sizeof head, "  %6u %12llu ", lf.insns[i].pc, static_cast<unsigned long long>(c));
                r.text += head + std::string(bar, '#') + std::string(20 - bar, ' ') + ' ' +
                          format_instruction(lf.insns[i]) + '\n';
            }
        }
        return r;
    }

private:
    uint64_t count(size_t fi, size_t i) const
    {
        switch (mode_)
        {
        case Mode::counter:
            return funcs_[fi].counters[i]->count;
        case Mode::generic:
            return funcs_[fi].generics[i]->count;
        case Mode::global:
            return funcs_[fi].counts[listing_->funcs[fi].insns[i].pc];
        }
        return 0;
    }

    struct FuncHotness
    {
        std::vector<std::shared_ptr<CountProbe>> counters;
        std::vector<std::shared_ptr<GenericCounter>> generics;
        /// Indexed by pc (global mode).
        std::vector<uint64_t> counts;
    };

    Mode mode_;
    const Module* module_ = nullptr;
    std::unique_ptr<Listing> listing_;
    std::vector<FuncHotness> funcs_;
    ProbePtr global_;
};
}  // namespace

std::unique_ptr<Monitor> make_hotness(std::string_view variant)
{
    const auto mode = variant == "generic" ? HotnessMonitor::Mode::generic
                      : variant == "global" ? HotnessMonitor::Mode::global
                                            : HotnessMonitor::Mode::counter;
    return std::make_unique<HotnessMonitor>(mode);
}
}  // namespace wprobe::monitors
