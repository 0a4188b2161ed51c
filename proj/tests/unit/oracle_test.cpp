// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

// Cross-checks the reference oracle against wasm-interp output and against
// the engine's own executed-instruction stream.

#include "../support/harness.hpp"
#include "../support/oracle.hpp"
#include <wprobe/frame_accessor.hpp>
#include <gtest/gtest.h>

using namespace wprobe;
using namespace wprobe::test;

TEST(Oracle, MatchesReferenceInterpreter)
{
    for (const auto& [name, line] : expected_results())
    {
        const Module m = load_fixture(name);
        const auto r = oracle::run(m, "main");
        InvokeResult ir{r.results, std::nullopt};
        if (r.trap)
            ir.trap = Trap{*r.trap, {}};
        const auto got = wabt_line(ir);
        if (r.trap)
            EXPECT_TRUE(line.starts_with(got)) << name << ": " << got;
        else
            EXPECT_EQ(got, line) << name;
    }
}

TEST(Oracle, EngineExecutesTheSameInstructionStream)
{
    for (const auto& name : fixture_names())
    {
        Loaded l{name, true};
        struct Step
        {
            uint32_t func, pc, depth;
            bool operator==(const Step&) const = default;
        };
        std::vector<Step> steps;
        l.engine->insert_global_probe(make_probe([&](ProbeContext& c) {
            steps.push_back({c.location().func_index, c.location().pc, c.frame()->depth()});
        }));
        l.instantiate();
        const auto result = l.run();

        const auto r = oracle::run(*l.module, "main");
        std::vector<Step> expected;
        for (const auto& t : r.trace)
            expected.push_back({t.func, t.pc, t.depth});
        ASSERT_EQ(steps.size(), expected.size()) << name;
        EXPECT_TRUE(steps == expected) << name;
        EXPECT_EQ(result.values, r.results) << name;
        EXPECT_EQ(result.trap.has_value(), r.trap.has_value()) << name;
        if (result.trap && r.trap)
        {
            EXPECT_EQ(result.trap->kind, *r.trap) << name;
            EXPECT_EQ(result.trap->location.pc, r.trace.back().pc) << name;
        }
        EXPECT_EQ(l.instance->memory, r.memory) << name;
        EXPECT_EQ(l.instance->global_values(), r.globals) << name;
        EXPECT_EQ(l.out.str(), r.output) << name;
    }
}
