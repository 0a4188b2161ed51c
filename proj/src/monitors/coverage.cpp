// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"

namespace wprobe::monitors
{
namespace
{
class CoverageMonitor final : public Monitor
{
public:
    std::string_view name() const noexcept override { return "coverage"; }

    void on_load(Engine& engine, Module& module) override
    {
        module_ = &module;
        listing_ = std::make_unique<Listing>(module);
        for (const auto& lf : listing_->funcs)
        {
            auto& fc = funcs_.emplace_back();
            fc.hit.assign(lf.insns.size(), false);
            fc.probes.resize(lf.insns.size());
        }
        for (size_t fi = 0; fi < listing_->funcs.size(); ++fi)
        {
            const auto& lf = listing_->funcs[fi];
            for (size_t i = 0; i < lf.insns.size(); ++i)
            {
                auto p = make_probe([this, fi, i](ProbeContext& ctx) {
                    auto& fc = funcs_[fi];
                    fc.hit[i] = true;
                    ctx.engine().remove_probe(ctx.location(), fc.probes[i]);
                });
                funcs_[fi].probes[i] = p;
                engine.insert_probe(CodeLocation{module.id, lf.index, lf.insns[i].pc}, p);
            }
        }
    }

    Report report() const override
    {
        Report r{"coverage", {}, {}};
        for (size_t fi = 0; fi < funcs_.size(); ++fi)
        {
            const auto& lf = listing_->funcs[fi];
            const auto& fc = funcs_[fi];
            uint64_t covered = 0;
            for (size_t i = 0; i < lf.insns.size(); ++i)
            {
                covered += fc.hit[i];
                r.rows.push_back({"coverage", lf.index, lf.insns[i].pc, format_instruction(lf.insns[i]),
                    fc.hit[i] ? "1" : "0"});
            }
            const auto pct = percent(covered, lf.insns.size());
            r.rows.push_back({"coverage", lf.index, std::nullopt, "percent", pct});
            r.text += "func " + std::to_string(lf.index) + ": " + std::to_string(covered) + "/" +
                      std::to_string(lf.insns.size()) + " instructions (" + pct + "%)\n";
        }
        return r;
    }

private:
    struct FuncCoverage
    {
        std::vector<bool> hit;
        std::vector<ProbePtr> probes;
    };

    const Module* module_ = nullptr;
    std::unique_ptr<Listing> listing_;
    std::vector<FuncCoverage> funcs_;
};
}  // namespace

std::unique_ptr<Monitor> make_coverage()
{
    return std::make_unique<CoverageMonitor>();
}
}  // namespace wprobe::monitors
