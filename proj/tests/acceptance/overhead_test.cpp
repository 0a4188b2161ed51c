// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

// Timing checks on the hot_loop fixture. These live only in the acceptance
// binary.

#include "../support/fixtures.hpp"
#include "../support/oracle.hpp"
#include <wprobe/runner.hpp>
#include <gtest/gtest.h>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <time.h>

using namespace wprobe;
using namespace wprobe::test;
using clock_type = std::chrono::steady_clock;

namespace
{
uint64_t executed_instructions(const Module& m, uint32_t n)
{
    oracle::Options opts;
    opts.record_trace = false;
    const auto r = oracle::run(m, "run", {Value::i32(n)}, opts);
    uint64_t total = 0;
    for (const auto& [loc, count] : r.counts)
        total += count;
    return total;
}

std::string fmt(const char* format, double a, double b = 0, double c = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

double thread_cpu_seconds()
{
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return double(ts.tv_sec) + double(ts.tv_nsec) * 1e-9;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}
}  // namespace

TEST(Overhead, ZeroOverheadWhenDisabled)
{
    // The loop alternates between its if and else arms, so the instruction
    // count is affine in the number of iteration pairs. Two oracle runs fix
    // the line and a third checks it.
    const Module m = load_fixture("hot_loop");
    const uint64_t c10 = executed_instructions(m, 10), c20 = executed_instructions(m, 20);
    const uint64_t per_pair = (c20 - c10) / 5;
    const uint64_t fixed = c10 - 5 * per_pair;
    ASSERT_EQ(executed_instructions(m, 36), fixed + 18 * per_pair);
    const uint64_t target = 100'000'000;
    const uint64_t pairs = (target - fixed + per_pair - 1) / per_pair;
    const auto n = static_cast<uint32_t>(2 * pairs);
    const uint64_t instructions = fixed + pairs * per_pair;

    const auto bytes = fixture_bytes("hot_loop");
    RunOptions opts;
    opts.entry = "run";
    opts.args = {std::to_string(n)};
    const auto timed = [&](bool stripped, std::optional<uint64_t>& digest) {
        auto o = opts;
        o.stripped = stripped;
        const double start = thread_cpu_seconds();
        const auto r = run_module(bytes, {}, o);
        const double s = thread_cpu_seconds() - start;
        EXPECT_EQ(r.exit_code, exit_ok);
        if (digest)
            EXPECT_EQ(*digest, r.state_digest);
        digest = r.state_digest;
        return s;
    };

    std::optional<uint64_t> digest;
    timed(true, digest);
    timed(false, digest);
    // Host speed drifts in phases lasting seconds, so each probe-capable run
    // is compared with the stripped run next to it, alternating the order.
    std::vector<double> stripped, capable, ratios;
    for (int rep = 0; rep < 41; ++rep)
    {
        double s, c;
        if (rep % 2)
        {
            c = timed(false, digest);
            s = timed(true, digest);
        }
        else
        {
            s = timed(true, digest);
            c = timed(false, digest);
        }
        stripped.push_back(s);
        capable.push_back(c);
        ratios.push_back(c / s);
    }
    const double ms = median(stripped), mc = median(capable);
    const double ratio = median(ratios);
    RecordProperty("detail", fmt("%.0f instructions per run; median CPU time stripped %.1f ms, probe-capable %.1f ms", double(instructions), ms * 1e3, mc * 1e3) +
                                 fmt(", median paired ratio %.3f (limit 1.050)", ratio));
    EXPECT_LE(ratio, 1.05);
}

TEST(Overhead, DirectionalOverhead)
{
    const auto bytes = fixture_bytes("hot_loop");
    BenchOptions bo;
    bo.repetitions = 5;
    bo.run.entry = "run";
    bo.run.args = {"300000"};

    const auto run_bench = [&](const std::vector<std::string>& specs, double& seconds) {
        const auto start = clock_type::now();
        auto result = bench(bytes, specs, bo);
        seconds = std::chrono::duration<double>(clock_type::now() - start).count();
        EXPECT_FALSE(result.failure);
        EXPECT_TRUE(result.warnings.empty());
        EXPECT_LT(seconds, 120.0);
        return result;
    };
    const auto relative = [](const BenchResult& r, const std::string& config) {
        for (const auto& row : r.rows)
            if (row.config == config)
                return row.relative;
        ADD_FAILURE() << "no row " << config;
        return std::nan("");
    };

    double branch_s = 0, hotness_s = 0;
    const auto branch = run_bench({"branch", "branch:global"}, branch_s);
    const auto hotness = run_bench({"hotness", "hotness:generic"}, hotness_s);
    const double local = relative(branch, "branch"), global = relative(branch, "branch:global");
    const double counter = relative(hotness, "hotness"), generic = relative(hotness, "hotness:generic");

    RecordProperty("detail", fmt("branch local %.2fx, global %.2fx (ratio %.2f, need >= 2)", local, global, global / local) +
                                 fmt("; hotness counter %.2fx, generic %.2fx", counter, generic) +
                                 fmt("; bench times %.1f s and %.1f s", branch_s, hotness_s));
    EXPECT_GE(global, 2 * local);
    EXPECT_LT(counter, generic);
}
