// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

// Monitor reports against the reference oracle, plus composition and
// local/global equivalence.

#include "../support/harness.hpp"
#include "../support/oracle.hpp"
#include <wprobe/disassembler.hpp>
#include <wprobe/monitor.hpp>
#include <wprobe/opcodes.hpp>
#include <wprobe/runner.hpp>
#include <gtest/gtest.h>
#include <set>

using namespace wprobe;
using namespace wprobe::test;

namespace
{
struct Outcome
{
    RunResult run;
    std::string trace;
};

Outcome run_with(const std::string& fixture, const std::vector<std::string>& specs)
{
    Outcome o;
    std::ostringstream trace;
    auto monitors = create_monitors(specs, MonitorEnv{&trace, nullptr, nullptr});
    std::vector<Monitor*> ptrs;
    for (auto& m : monitors)
        ptrs.push_back(m.get());
    o.run = run_module(fixture_bytes(fixture), ptrs, RunOptions{});
    o.trace = trace.str();
    return o;
}

const Report& only_report(const Outcome& o)
{
    EXPECT_EQ(o.run.reports.size(), 1u);
    return o.run.reports.at(0);
}

struct Oracle
{
    Module module;
    oracle::Run run;

    explicit Oracle(const std::string& fixture) : module{load_fixture(fixture)}, run{oracle::run(module, "main")} {}

    uint64_t count(uint32_t func, uint32_t pc) const
    {
        const auto it = run.counts.find({func, pc});
        return it == run.counts.end() ? 0 : it->second;
    }
};

std::string pct(uint64_t part, uint64_t whole)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", whole ? 100.0 * double(part) / double(whole) : 0.0);
    return buf;
}

std::vector<ReportRow> expected_hotness(const Oracle& o)
{
    std::vector<ReportRow> rows;
    for (const auto& f : o.module.funcs)
        for (const auto& insn : disassemble(f))
            rows.push_back({"hotness", f.index, insn.pc, format_instruction(insn),
                std::to_string(o.count(f.index, insn.pc))});
    return rows;
}

std::vector<ReportRow> expected_coverage(const Oracle& o)
{
    std::vector<ReportRow> rows;
    for (const auto& f : o.module.funcs)
    {
        const auto insns = disassemble(f);
        uint64_t covered = 0;
        for (const auto& insn : insns)
        {
            const bool hit = o.count(f.index, insn.pc) > 0;
            covered += hit;
            rows.push_back({"coverage", f.index, insn.pc, format_instruction(insn), hit ? "1" : "0"});
        }
        rows.push_back({"coverage", f.index, std::nullopt, "percent", pct(covered, insns.size())});
    }
    return rows;
}

std::vector<ReportRow> expected_loop(const Oracle& o)
{
    std::vector<ReportRow> rows;
    for (const auto& [loc, n] : o.run.loop_headers)
        rows.push_back({"loop", loc.first, loc.second, "iterations", std::to_string(n)});
    return rows;
}

std::vector<ReportRow> expected_branch(const Oracle& o)
{
    std::vector<ReportRow> rows;
    for (const auto& f : o.module.funcs)
        for (const auto& insn : disassemble(f))
        {
            const oracle::Loc loc{f.index, insn.pc};
            if (insn.opcode == op::if_ || insn.opcode == op::br_if)
            {
                const auto it = o.run.conditions.find(loc);
                const auto [taken, not_taken] = it == o.run.conditions.end() ? std::pair<uint64_t, uint64_t>{} : it->second;
                rows.push_back({"branch", f.index, insn.pc, "taken", std::to_string(taken)});
                rows.push_back({"branch", f.index, insn.pc, "not_taken", std::to_string(not_taken)});
            }
            else if (insn.opcode == op::br_table)
            {
                const uint32_t cases = static_cast<uint32_t>(insn.immediates.size() - 1);
                const auto it = o.run.tables.find(loc);
                for (uint32_t i = 0; i <= cases; ++i)
                {
                    uint64_t n = 0;
                    if (it != o.run.tables.end() && it->second.count(i))
                        n = it->second.at(i);
                    rows.push_back({"branch", f.index, insn.pc, i == cases ? "default" : "case" + std::to_string(i),
                        std::to_string(n)});
                }
            }
        }
    return rows;
}

std::vector<ReportRow> expected_calls(const Oracle& o)
{
    std::vector<ReportRow> rows;
    for (const auto& [key, n] : o.run.calls)
    {
        const auto [func, pc, callee] = key;
        rows.push_back({"calls", func, pc, callee == oracle::no_callee ? "undefined" : "f" + std::to_string(callee),
            std::to_string(n)});
    }
    return rows;
}

std::vector<ReportRow> expected_memory(const Oracle& o)
{
    std::vector<ReportRow> rows;
    for (const auto& a : o.run.memory_log)
        rows.push_back({"memory", a.func, a.pc, a.store ? "store" : "load",
            "width=" + std::to_string(a.width) + " addr=" + std::to_string(a.addr) +
                " value=" + (a.value ? to_string(*a.value) : std::string("?"))});
    return rows;
}

const std::vector<std::string> all_monitors{
    "trace", "coverage", "loop", "hotness", "branch", "memory", "calls", "debugger"};
}  // namespace

class MonitorOracle : public ::testing::TestWithParam<std::string>
{};

TEST_P(MonitorOracle, HotnessMatchesOracleCounts)
{
    const Oracle o{GetParam()};
    const auto expected = expected_hotness(o);
    for (const char* spec : {"hotness", "hotness:generic", "hotness:global"})
    {
        const auto out = run_with(GetParam(), {spec});
        EXPECT_EQ(only_report(out).rows, expected) << spec;
    }
}

TEST_P(MonitorOracle, CoverageMatchesOracle)
{
    const Oracle o{GetParam()};
    EXPECT_EQ(only_report(run_with(GetParam(), {"coverage"})).rows, expected_coverage(o));
}

TEST_P(MonitorOracle, LoopMatchesOracleHeaderCounts)
{
    const Oracle o{GetParam()};
    EXPECT_EQ(only_report(run_with(GetParam(), {"loop"})).rows, expected_loop(o));
}

TEST_P(MonitorOracle, BranchMatchesOracle)
{
    const Oracle o{GetParam()};
    const auto expected = expected_branch(o);
    EXPECT_EQ(only_report(run_with(GetParam(), {"branch"})).rows, expected);
    EXPECT_EQ(only_report(run_with(GetParam(), {"branch:global"})).rows, expected);
}

TEST_P(MonitorOracle, CallsMatchOracleEdges)
{
    const Oracle o{GetParam()};
    EXPECT_EQ(only_report(run_with(GetParam(), {"calls"})).rows, expected_calls(o));
}

TEST_P(MonitorOracle, MemoryLogMatchesOracle)
{
    const Oracle o{GetParam()};
    EXPECT_EQ(only_report(run_with(GetParam(), {"memory"})).rows, expected_memory(o));
}

TEST_P(MonitorOracle, TraceHasOneLinePerExecutedInstruction)
{
    const Oracle o{GetParam()};
    const auto out = run_with(GetParam(), {"trace"});
    std::istringstream lines{out.trace};
    std::string line;
    size_t i = 0;
    for (; std::getline(lines, line); ++i)
    {
        ASSERT_LT(i, o.run.trace.size());
        const auto& t = o.run.trace[i];
        const auto& f = o.module.funcs.at(t.func - o.module.num_imported_funcs());
        const std::string prefix = std::string(2 * (t.depth - 1), ' ') + "[" + std::to_string(t.depth) + "] f" +
                                   std::to_string(t.func) + "+" + std::to_string(t.pc) + " " +
                                   format_instruction(decode_instruction(f.pristine_body, t.pc)) + " ; stack=[";
        ASSERT_EQ(line.substr(0, prefix.size()), prefix) << "line " << i;
    }
    EXPECT_EQ(i, o.run.trace.size());
    EXPECT_EQ(only_report(out).rows,
        (std::vector<ReportRow>{{"trace", std::nullopt, std::nullopt, "instructions", std::to_string(i)}}));
}

TEST_P(MonitorOracle, AllMonitorsTogetherMatchSoloRuns)
{
    const auto together = run_with(GetParam(), all_monitors);
    ASSERT_EQ(together.run.reports.size(), all_monitors.size());
    for (size_t i = 0; i < all_monitors.size(); ++i)
    {
        const auto solo = run_with(GetParam(), {all_monitors[i]});
        EXPECT_EQ(together.run.reports[i], only_report(solo)) << all_monitors[i];
        EXPECT_EQ(together.run.exit_code, solo.run.exit_code);
        EXPECT_EQ(together.run.state_digest, solo.run.state_digest);
        if (all_monitors[i] == "trace")
            EXPECT_EQ(together.trace, solo.trace);
    }
}

TEST_P(MonitorOracle, LocalAndGlobalVariantsReportIdentically)
{
    const auto counter = only_report(run_with(GetParam(), {"hotness"}));
    EXPECT_EQ(only_report(run_with(GetParam(), {"hotness:global"})), counter);
    EXPECT_EQ(only_report(run_with(GetParam(), {"hotness:generic"})), counter);
    EXPECT_EQ(only_report(run_with(GetParam(), {"branch:global"})), only_report(run_with(GetParam(), {"branch"})));
}

INSTANTIATE_TEST_SUITE_P(Fixtures, MonitorOracle, ::testing::ValuesIn(fixture_names()),
    [](const auto& info) { return info.param; });

TEST(MonitorRegistry, ListsEightUniqueMonitors)
{
    const auto& list = list_monitors();
    ASSERT_EQ(list.size(), 8u);
    std::set<std::string_view> names;
    for (const auto& m : list)
    {
        names.insert(m.name);
        EXPECT_FALSE(m.description.empty());
        EXPECT_EQ(create_monitor(m.name, {})->name(), m.name);
    }
    EXPECT_EQ(names.size(), list.size());
}

TEST(MonitorRegistry, RejectsUnknownNamesAndVariants)
{
    for (const char* spec : {"bogus", "hotness:fast", "loop:global", "", "branch:"})
        EXPECT_THROW(create_monitor(spec, {}), UnknownMonitor) << spec;
    try
    {
        create_monitor("bogus", {});
    }
    catch (const UnknownMonitor& e)
    {
        EXPECT_STREQ(e.what(), "unknown monitor: bogus");
    }
}

TEST(MonitorReports, TsvUsesDashForAbsentFields)
{
    EXPECT_EQ(to_tsv(ReportRow{"loop", 3, 12, "iterations", "7"}), "loop\t3\t12\titerations\t7");
    EXPECT_EQ(to_tsv(ReportRow{"trace", std::nullopt, std::nullopt, "instructions", "9"}), "trace\t-\t-\tinstructions\t9");
}

TEST(MonitorReports, Loop3HeaderRunsThreeTimes)
{
    EXPECT_EQ(only_report(run_with("loop3", {"loop"})).rows,
        (std::vector<ReportRow>{{"loop", 0, 6, "iterations", "3"}}));
}

TEST(MonitorReports, ProgramWithoutCallsHasNoEdges)
{
    EXPECT_TRUE(only_report(run_with("loop3", {"calls"})).rows.empty());
}

TEST(MonitorReports, OutOfBoundsStoreIsLoggedBeforeTheTrap)
{
    const auto out = run_with("trap_oob", {"memory"});
    EXPECT_EQ(out.run.exit_code, exit_trap);
    const auto& rows = only_report(out).rows;
    ASSERT_FALSE(rows.empty());
    const auto& trap = out.run.result->trap->location;
    EXPECT_EQ(rows.back().func, trap.func_index);
    EXPECT_EQ(rows.back().pc, trap.pc);
}
