// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner. Runs the suites backing each acceptance criterion and
// prints one PASS/FAIL line per criterion.

#include <gtest/gtest.h>
#include <algorithm>
#include <fnmatch.h>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace
{
struct Criterion
{
    const char* id;
    const char* summary;
    std::vector<const char*> tests;
    double time_limit_s = 0;
};

const std::vector<Criterion> criteria{
    {"consistency", "insertion order, deferred inserts, deferred removal; 1000 randomized interleavings each",
        {"Consistency.*"}, 60},
    {"non-intrusiveness", "empty local/global probes leave final state bit-identical on every fixture",
        {"NonIntrusiveness.*"}},
    {"oracle-equivalence", "hotness, loop, branch, calls, coverage equal the oracle tallies on every fixture",
        {"Fixtures/MonitorOracle.HotnessMatchesOracleCounts/*", "Fixtures/MonitorOracle.CoverageMatchesOracle/*",
            "Fixtures/MonitorOracle.LoopMatchesOracleHeaderCounts/*", "Fixtures/MonitorOracle.BranchMatchesOracle/*",
            "Fixtures/MonitorOracle.CallsMatchOracleEdges/*"}},
    {"overwrite-restore", "randomized insert/remove (>= 10000 ops) restores pristine bodies",
        {"OverwriteRestore.*"}},
    {"dangling-accessor", "stale accessor use throws StaleAccessor in 1000 of 1000 call-tree trials",
        {"DanglingAccessor.*"}},
    {"zero-overhead", "probe-capable engine without probes within 5% of the stripped interpreter",
        {"Overhead.ZeroOverheadWhenDisabled"}},
    {"directional-overhead", "branch:global >= 2x branch; counter hotness below generic hotness",
        {"Overhead.DirectionalOverhead"}},
    {"composability", "all eight monitors together report exactly as solo runs on every fixture",
        {"Fixtures/MonitorOracle.AllMonitorsTogetherMatchSoloRuns/*"}},
    {"frame-modification", "setOperand on a br_if condition matches the oracle with the condition forced",
        {"Debugger.ForcedBranchConditionMatchesOracle",
            "DebugServer.SetOperandAtBranchMatchesOracleWithForcedCondition"}},
};

struct Outcome
{
    bool passed = true;
    double seconds = 0;
    std::string detail;
    std::vector<std::string> failures;
};

class Collector : public ::testing::EmptyTestEventListener
{
public:
    std::map<std::string, Outcome> results;

    void OnTestPartResult(const ::testing::TestPartResult& part) override
    {
        if (part.failed() && current_)
            current_->failures.push_back(std::string(part.file_name() ? part.file_name() : "?") + ":" +
                                         std::to_string(part.line_number()) + ": " + part.summary());
    }

    void OnTestStart(const ::testing::TestInfo& info) override
    {
        current_ = &results[full_name(info)];
    }

    void OnTestEnd(const ::testing::TestInfo& info) override
    {
        auto& o = results[full_name(info)];
        const auto* r = info.result();
        o.passed = r->Passed();
        o.seconds = double(r->elapsed_time()) / 1000.0;
        for (int i = 0; i < r->test_property_count(); ++i)
            if (std::string(r->GetTestProperty(i).key()) == "detail")
                o.detail = r->GetTestProperty(i).value();
        current_ = nullptr;
    }

    static std::string full_name(const ::testing::TestInfo& info)
    {
        return std::string(info.test_suite_name()) + "." + info.name();
    }

private:
    Outcome* current_ = nullptr;
};
}  // namespace

int main(int argc, char** argv)
{
    std::string filter;
    for (const auto& c : criteria)
        for (const char* t : c.tests)
            filter += (filter.empty() ? "" : ":") + std::string(t);
    ::testing::GTEST_FLAG(filter) = filter;
    ::testing::InitGoogleTest(&argc, argv);

    auto& listeners = ::testing::UnitTest::GetInstance()->listeners();
    delete listeners.Release(listeners.default_result_printer());
    auto* collector = new Collector;
    listeners.Append(collector);
    [[maybe_unused]] const int status = RUN_ALL_TESTS();

    int failed = 0;
    for (const auto& c : criteria)
    {
        size_t count = 0;
        bool ok = true;
        double seconds = 0;
        std::vector<std::string> details, failures;
        for (const auto& [name, o] : collector->results)
        {
            const bool matches = std::any_of(c.tests.begin(), c.tests.end(),
                [&](const char* pattern) { return fnmatch(pattern, name.c_str(), 0) == 0; });
            if (!matches)
                continue;
            ++count;
            ok &= o.passed;
            seconds += o.seconds;
            if (!o.detail.empty())
                details.push_back(o.detail);
            for (const auto& f : o.failures)
                failures.push_back(name + ": " + f);
        }
        std::string note;
        if (count == 0)
        {
            ok = false;
            note = "; no tests ran";
        }
        if (c.time_limit_s > 0 && seconds >= c.time_limit_s)
        {
            ok = false;
            note += "; over the time limit";
        }
        failed += !ok;
        std::printf("%s %-21s %s (%zu tests, %.2f s%s)\n", ok ? "PASS" : "FAIL", c.id, c.summary, count, seconds,
            note.c_str());
        for (const auto& d : details)
            std::printf("     %s\n", d.c_str());
        for (size_t i = 0; i < failures.size() && i < 10; ++i)
            std::printf("     %s\n", failures[i].c_str());
    }
    std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failed, criteria.size());
    return failed ? 1 : 0;
}
