// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"
#include "wprobe/frame_accessor.hpp"
#include "wprobe/opcodes.hpp"
#include <algorithm>

namespace wprobe::monitors
{
namespace
{
struct Site
{
    uint32_t func = 0;
    uint32_t pc = 0;
    uint8_t opcode = 0;
    /// if/br_if: [not taken, taken]. br_table: one slot per case, then default.
    std::vector<uint64_t> counts;

    void record(uint32_t v)
    {
        if (opcode == op::br_table)
            ++counts[std::min<size_t>(v, counts.size() - 1)];
        else
            ++counts[v != 0];
    }
};

class SiteProbe final : public OperandProbe
{
public:
    explicit SiteProbe(Site* site) noexcept : site_{site} {}
    void fire_tos(const CodeLocation&, Value top) override { site_->record(top.as_u32()); }

private:
    Site* site_;
};

class BranchMonitor final : public Monitor
{
public:
    explicit BranchMonitor(bool global) : global_{global} {}

    std::string_view name() const noexcept override { return "branch"; }

    void on_load(Engine& engine, Module& module) override
    {
        const Listing listing{module};
        const uint32_t imports = module.num_imported_funcs();
        site_at_.resize(listing.funcs.size());
        for (const auto& lf : listing.funcs)
        {
            site_at_[lf.index - imports].assign(lf.at.size(), -1);
            for (const auto& insn : lf.insns)
            {
                if (insn.opcode != op::if_ && insn.opcode != op::br_if && insn.opcode != op::br_table)
                    continue;
                Site s{lf.index, insn.pc, insn.opcode, {}};
                // br_table immediates list every case label and then the default.
                s.counts.assign(insn.opcode == op::br_table ? insn.immediates.size() : 2, 0);
                site_at_[lf.index - imports][insn.pc] = static_cast<int32_t>(sites_.size());
                sites_.push_back(std::move(s));
            }
        }
        if (global_)
        {
            const uint32_t id = module.id;
            probe_ = make_probe([this, id, imports](ProbeContext& ctx) {
                const auto& loc = ctx.location();
                if (loc.module_id != id)
                    return;
                const int32_t s = site_at_[loc.func_index - imports][loc.pc];
                if (s >= 0)
                    sites_[s].record(ctx.frame()->get_operand(0).as_u32());
            });
            engine.insert_global_probe(probe_);
            return;
        }
        for (auto& s : sites_)
        {
            auto p = std::make_shared<SiteProbe>(&s);
            engine.insert_probe(CodeLocation{module.id, s.func, s.pc}, p);
            probes_.push_back(std::move(p));
        }
    }

    Report report() const override
    {
        Report r{"branch", {}, {}};
        for (const auto& s : sites_)
        {
            const std::string where = "func " + std::to_string(s.func) + " pc " + std::to_string(s.pc);
            if (s.opcode == op::br_table)
            {
                r.text += where + " br_table:";
                for (size_t i = 0; i < s.counts.size(); ++i)
                {
                    const bool last = i + 1 == s.counts.size();
                    const std::string label = last ? "default" : "case" + std::to_string(i);
                    r.rows.push_back({"branch", s.func, s.pc, label, std::to_string(s.counts[i])});
                    r.text += ' ' + label + '=' + std::to_string(s.counts[i]);
                }
                r.text += '\n';
                continue;
            }
            const uint64_t taken = s.counts[1], not_taken = s.counts[0];
            r.rows.push_back({"branch", s.func, s.pc, "taken", std::to_string(taken)});
            r.rows.push_back({"branch", s.func, s.pc, "not_taken", std::to_string(not_taken)});
            r.text += where + (s.opcode == op::if_ ? " if" : " br_if") + ": taken " + std::to_string(taken) +
                      ", not taken " + std::to_string(not_taken) + " (" + percent(taken, taken + not_taken) +
                      "% taken)\n";
        }
        return r;
    }

private:
    bool global_;
    std::vector<Site> sites_;
    std::vector<std::vector<int32_t>> site_at_;
    std::vector<ProbePtr> probes_;
    ProbePtr probe_;
};
}  // namespace

std::unique_ptr<Monitor> make_branch(std::string_view variant)
{
    return std::make_unique<BranchMonitor>(variant == "global");
}
}  // namespace wprobe::monitors
