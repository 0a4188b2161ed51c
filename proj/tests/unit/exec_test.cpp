// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "../support/harness.hpp"
#include <wprobe/errors.hpp>
#include <wprobe/frame_accessor.hpp>
#include <wprobe/opcodes.hpp>
#include <gtest/gtest.h>
#include <thread>

using namespace wprobe;
using namespace wprobe::test;

namespace
{
void expect_matches_reference(const std::string& name, const std::string& expected, const InvokeResult& r)
{
    const auto line = wabt_line(r);
    if (r.trap)
        EXPECT_TRUE(expected.starts_with(line)) << name << ": got '" << line << "', want '" << expected << "'";
    else
        EXPECT_EQ(line, expected) << name;
}
}  // namespace

TEST(Exec, FixturesMatchReferenceInterpreter)
{
    const auto expected = expected_results();
    ASSERT_GE(expected.size(), 20u);
    for (const auto& [name, line] : expected)
    {
        Loaded l{name};
        expect_matches_reference(name, line, l.run());
    }
}

TEST(Exec, StrippedInterpreterMatchesReference)
{
    for (const auto& [name, line] : expected_results())
    {
        Loaded l{name};
        l.engine->set_stripped_interpreter(true);
        expect_matches_reference(name, line, l.run());
    }
}

TEST(Exec, HostImportsPrint)
{
    Loaded fact{"factorial"};
    const auto r = fact.run();
    ASSERT_FALSE(r.trapped());
    EXPECT_EQ(r.values, std::vector<Value>{Value::i32(24)});
    EXPECT_EQ(fact.out.str(), "24");

    Loaded hp{"host_print"};
    EXPECT_FALSE(hp.run().trapped());
    EXPECT_EQ(hp.out.str(), "0\n1\n2\n");
}

TEST(Exec, ArgumentsAndExportLookup)
{
    Loaded l{"factorial"};
    const auto r = l.run("fact", {Value::i32(5)});
    EXPECT_EQ(r.values, std::vector<Value>{Value::i32(120)});
    EXPECT_THROW(l.run("fact", {}), ArgumentMismatch);
    EXPECT_THROW(l.run("fact", {Value::i64(5)}), ArgumentMismatch);
    EXPECT_THROW(l.run("nope"), NoSuchExport);
}

TEST(Exec, TrapLocations)
{
    Loaded l{"trap_unreachable"};
    const auto r = l.run();
    ASSERT_TRUE(r.trapped());
    EXPECT_EQ(r.trap->kind, TrapKind::unreachable);
    const auto& body = l.module->func(r.trap->location.func_index)->pristine_body;
    EXPECT_EQ(body[r.trap->location.pc], op::unreachable);
}

TEST(Exec, StackExhaustionIsATrap)
{
    Loaded l{"stack_overflow"};
    const auto r = l.run();
    ASSERT_TRUE(r.trapped());
    EXPECT_EQ(r.trap->kind, TrapKind::stack_exhausted);
    EXPECT_EQ(l.engine->current_execution(), nullptr);
}

TEST(Instrument, Loop3HeaderCount)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    auto header = std::make_shared<CountProbe>();
    l.engine->insert_probe(l.at(f, 6), header);
    EXPECT_EQ(l.engine->original_opcode(l.at(f, 6)), op::local_get);
    EXPECT_EQ(l.module->func(f)->body[6], op::probe);
    l.run();
    EXPECT_EQ(header->count, 3u);

    l.engine->remove_probe(l.at(f, 6), header);
    EXPECT_EQ(l.module->func(f)->body[6], op::local_get);
    EXPECT_EQ(l.engine->probed_location_count(), 0u);
}

TEST(Instrument, GlobalProbeCountsEveryInstruction)
{
    Loaded l{"loop3"};
    auto all = std::make_shared<CountProbe>();
    l.engine->insert_global_probe(all);
    EXPECT_EQ(l.engine->dispatch_mode(), DispatchMode::global_probe);
    l.run();
    EXPECT_EQ(all->count, 20u);
    l.engine->remove_global_probe(all);
    EXPECT_EQ(l.engine->dispatch_mode(), DispatchMode::normal);
    l.run();
    EXPECT_EQ(all->count, 20u);
}

TEST(Instrument, ProbeApiErrors)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    auto p = std::make_shared<CountProbe>();
    EXPECT_THROW(l.engine->insert_probe(l.at(f, 1), p), InvalidLocation);
    EXPECT_THROW(l.engine->insert_probe(l.at(f, 1000), p), InvalidLocation);
    EXPECT_THROW(l.engine->insert_probe(l.at(99, 0), p), InvalidLocation);
    l.engine->insert_probe(l.at(f, 0), p);
    EXPECT_THROW(l.engine->insert_probe(l.at(f, 0), p), DuplicateInsert);
    EXPECT_THROW(l.engine->remove_probe(l.at(f, 2), p), NotInstalled);
    EXPECT_THROW(l.engine->remove_global_probe(p), NotInstalled);
    l.engine->insert_global_probe(p);
    EXPECT_THROW(l.engine->insert_global_probe(p), DuplicateInsert);
}

TEST(Instrument, FiringOrderGlobalThenLocalInInsertionOrder)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    std::vector<std::string> log;
    auto g = make_probe([&](ProbeContext& c) {
        if (c.location().pc == 6)
            log.push_back("g");
    });
    l.engine->insert_probe(l.at(f, 6), make_probe([&](ProbeContext&) { log.push_back("a"); }));
    l.engine->insert_probe(l.at(f, 6), make_probe([&](ProbeContext&) { log.push_back("b"); }));
    l.engine->insert_global_probe(g);
    l.run();
    EXPECT_EQ(log, (std::vector<std::string>{"g", "a", "b", "g", "a", "b", "g", "a", "b"}));
}

TEST(Instrument, ProbeExceptionAbortsWithMonitorError)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    l.engine->insert_probe(l.at(f, 6), make_probe([](ProbeContext&) { throw std::runtime_error("boom"); }));
    Execution exec{*l.instance, f, {}};
    EXPECT_THROW(exec.run(), MonitorError);
    EXPECT_EQ(exec.status(), ExecStatus::aborted);
    EXPECT_EQ(l.engine->current_execution(), nullptr);
}

TEST(Instrument, WrongContextFromAnotherThread)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    bool saw_wrong_context = false;
    auto extra = std::make_shared<CountProbe>();
    l.engine->insert_probe(l.at(f, 0), make_probe([&](ProbeContext& c) {
        std::thread t{[&] {
            try
            {
                c.engine().insert_probe(l.at(f, 2), extra);
            }
            catch (const WrongContext&)
            {
                saw_wrong_context = true;
            }
        }};
        t.join();
    }));
    l.run();
    EXPECT_TRUE(saw_wrong_context);
    EXPECT_TRUE(l.engine->probes_at(l.at(f, 2)).empty());
}

TEST(Instrument, StrippedInterpreterRefusesProbes)
{
    Loaded l{"loop3"};
    l.engine->insert_global_probe(std::make_shared<CountProbe>());
    l.engine->set_stripped_interpreter(true);
    EXPECT_THROW(l.run(), Error);
}

TEST(Instrument, OperandProbeSeesTopOfStack)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    std::vector<int32_t> seen;
    // br_if at pc 13 consumes the decremented counter.
    l.engine->insert_probe(l.at(f, 13), std::make_shared<FunctionOperandProbe>(
        [&](const CodeLocation&, Value v) { seen.push_back(v.as_i32()); }));
    l.run();
    EXPECT_EQ(seen, (std::vector<int32_t>{2, 1, 0}));
}

TEST(Pause, BreakpointPauseAndResume)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    auto bp = make_probe([](ProbeContext& c) { c.execution().request_pause("breakpoint"); });
    l.engine->insert_probe(l.at(f, 6), bp);
    Execution exec{*l.instance, f, {}};
    int pauses = 0;
    while (exec.run() == ExecStatus::paused)
    {
        ++pauses;
        EXPECT_EQ(exec.pause_reason(), "breakpoint");
        EXPECT_EQ(exec.location().pc, 6u);
        auto frame = exec.frame(0);
        EXPECT_EQ(frame->num_operands(), 0u);
        EXPECT_EQ(frame->get_local(0), Value::i32(3 - (pauses - 1)));
    }
    EXPECT_EQ(pauses, 3);
    EXPECT_EQ(exec.status(), ExecStatus::returned);
}

TEST(Pause, SingleStepVisitsEveryInstruction)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    Execution exec{*l.instance, f, {}};
    std::vector<uint32_t> pcs;
    StepOutcome o;
    do
    {
        o = exec.step();
        if (o == StepOutcome::continued)
        {
            EXPECT_EQ(exec.pause_reason(), "step");
            pcs.push_back(exec.location().pc);
        }
    } while (o == StepOutcome::continued);
    EXPECT_EQ(o, StepOutcome::returned);
    // 20 instructions executed; a pause precedes each one after the first.
    ASSERT_EQ(pcs.size(), 19u);
    EXPECT_EQ(pcs.front(), 2u);
    EXPECT_EQ(pcs.back(), 16u);
    EXPECT_EQ(l.engine->dispatch_mode(), DispatchMode::normal);
}

TEST(Pause, StepAfterBreakpointDoesNotRefireProbes)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    auto hits = std::make_shared<CountProbe>();
    l.engine->insert_probe(l.at(f, 6), make_probe([&](ProbeContext& c) {
        ++hits->count;
        c.execution().request_pause("breakpoint");
    }));
    Execution exec{*l.instance, f, {}};
    ASSERT_EQ(exec.run(), ExecStatus::paused);
    EXPECT_EQ(hits->count, 1u);
    ASSERT_EQ(exec.step(), StepOutcome::continued);
    EXPECT_EQ(exec.location().pc, 8u);
    EXPECT_EQ(hits->count, 1u);
}

TEST(Pause, RequestWhilePausedStopsAtNextBoundary)
{
    Loaded l{"loop3"};
    const uint32_t f = l.export_index("main");
    l.engine->insert_probe(l.at(f, 0), make_probe([](ProbeContext& c) { c.execution().request_pause("entry"); }));
    Execution exec{*l.instance, f, {}};
    ASSERT_EQ(exec.run(), ExecStatus::paused);
    EXPECT_EQ(exec.pause_reason(), "entry");
    exec.request_pause("user");
    ASSERT_EQ(exec.run(), ExecStatus::paused);
    EXPECT_EQ(exec.pause_reason(), "user");
    EXPECT_EQ(exec.location().pc, 2u);
    EXPECT_EQ(exec.run(), ExecStatus::returned);
}

TEST(Frames, AccessorsGoStaleAfterReturn)
{
    Loaded l{"factorial"};
    const uint32_t fact = l.export_index("fact");
    std::shared_ptr<FrameAccessor> kept;
    l.engine->insert_probe(l.at(fact, 0), make_probe([&](ProbeContext& c) {
        if (!kept)
            kept = c.frame();
    }));
    l.run("fact", {Value::i32(3)});
    ASSERT_TRUE(kept);
    EXPECT_FALSE(kept->valid());
    EXPECT_THROW(kept->get_local(0), StaleAccessor);
}

TEST(Frames, CallerChainAndOperands)
{
    Loaded l{"factorial"};
    const uint32_t fact = l.export_index("fact");
    std::vector<uint32_t> depths;
    l.engine->insert_probe(l.at(fact, 0), make_probe([&](ProbeContext& c) {
        auto fr = c.frame();
        depths.push_back(fr->depth());
        EXPECT_EQ(fr->num_operands(), 0u);
        if (auto caller = fr->caller())
        {
            EXPECT_EQ(caller->func_index(), fact);
            EXPECT_EQ(caller->get_local(0).as_i32(), fr->get_local(0).as_i32() + 1);
            // The caller still holds n while its call is in flight.
            ASSERT_EQ(caller->num_operands(), 1u);
            EXPECT_EQ(caller->get_operand(0), caller->get_local(0));
        }
    }));
    l.run("fact", {Value::i32(3)});
    EXPECT_EQ(depths, (std::vector<uint32_t>{1, 2, 3}));
}

TEST(Frames, SetLocalAndTypeChecks)
{
    Loaded l{"factorial"};
    const uint32_t fact = l.export_index("fact");
    bool done = false;
    l.engine->insert_probe(l.at(fact, 0), make_probe([&](ProbeContext& c) {
        if (done)
            return;
        done = true;
        auto fr = c.frame();
        EXPECT_THROW(fr->set_local(0, Value::i64(1)), TypeMismatch);
        EXPECT_THROW(fr->get_local(1), IndexOutOfRange);
        fr->set_local(0, Value::i32(5));
    }));
    EXPECT_EQ(l.run("fact", {Value::i32(3)}).values, std::vector<Value>{Value::i32(120)});
}
