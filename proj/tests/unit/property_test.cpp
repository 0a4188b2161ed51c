// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

// Randomized properties of the probe framework. Every generator is seeded
// so that a failure reproduces.

#include "../support/harness.hpp"
#include "../support/oracle.hpp"
#include <wprobe/disassembler.hpp>
#include <wprobe/errors.hpp>
#include <wprobe/frame_accessor.hpp>
#include <wprobe/opcodes.hpp>
#include <gtest/gtest.h>
#include <map>
#include <random>

using namespace wprobe;
using namespace wprobe::test;

namespace
{
/// pc of the first instruction inside the first loop of `func`.
uint32_t first_loop_body_pc(const Module& m, uint32_t func)
{
    const auto insns = disassemble(*m.func(func));
    for (size_t i = 0; i + 1 < insns.size(); ++i)
        if (insns[i].opcode == op::loop)
            return insns[i + 1].pc;
    throw std::logic_error("no loop");
}

// ---------------------------------------------------------------------------
// Consistency of probe lists under mutation during firing.
//
// Each firing consumes the next action from a pre-generated script. The
// model replays the script against a snapshot-per-occurrence list and
// predicts the exact firing log.

enum class Act
{
    none,
    insert,
    remove,
};

struct Action
{
    Act act = Act::none;
    uint32_t pick = 0;
};

struct Script
{
    uint32_t initial = 0;
    std::vector<Action> actions;

    Action at(size_t k) const { return k < actions.size() ? actions[k] : Action{}; }
};

std::vector<uint32_t> model_log(const Script& s, uint64_t occurrences)
{
    std::vector<uint32_t> live, log;
    uint32_t next_id = 0;
    for (uint32_t i = 0; i < s.initial; ++i)
        live.push_back(next_id++);
    size_t k = 0;
    for (uint64_t occ = 0; occ < occurrences; ++occ)
    {
        const auto snapshot = live;
        for (const uint32_t id : snapshot)
        {
            log.push_back(id);
            const Action a = s.at(k++);
            if (a.act == Act::insert)
                live.push_back(next_id++);
            else if (a.act == Act::remove && !live.empty())
                live.erase(live.begin() + a.pick % live.size());
        }
    }
    return log;
}

/// Runs the script against the engine and returns the observed log.
struct ScriptRun
{
    std::vector<uint32_t> log;
    std::vector<uint32_t> final_live;
    std::vector<uint32_t> engine_final;
};

ScriptRun run_script(Loaded& l, const CodeLocation& loc, const Script& s, const std::vector<Value>& args)
{
    ScriptRun out;
    std::vector<std::pair<uint32_t, ProbePtr>> live;
    std::map<const Probe*, uint32_t> ids;
    uint32_t next_id = 0;
    size_t k = 0;
    std::function<ProbePtr()> make = [&]() -> ProbePtr {
        const uint32_t id = next_id++;
        auto p = make_probe([&, id](ProbeContext&) {
            out.log.push_back(id);
            const Action a = s.at(k++);
            if (a.act == Act::insert)
            {
                auto fresh = make();
                live.emplace_back(ids.at(fresh.get()), fresh);
                l.engine->insert_probe(loc, fresh);
            }
            else if (a.act == Act::remove && !live.empty())
            {
                const size_t i = a.pick % live.size();
                l.engine->remove_probe(loc, live[i].second);
                live.erase(live.begin() + i);
            }
        });
        ids[p.get()] = id;
        return p;
    };
    for (uint32_t i = 0; i < s.initial; ++i)
    {
        auto p = make();
        live.emplace_back(ids.at(p.get()), p);
        l.engine->insert_probe(loc, p);
    }
    l.run("run", args);
    for (const auto& [id, p] : live)
        out.final_live.push_back(id);
    for (const auto& p : l.engine->probes_at(loc))
        out.engine_final.push_back(ids.at(p.get()));
    for (const auto& [id, p] : live)
        l.engine->remove_probe(loc, p);
    return out;
}

class Consistency : public ::testing::Test
{
protected:
    static constexpr int trials = 1000;

    Loaded l{"hot_loop"};
    const uint32_t run_fn = l.export_index("run");
    const CodeLocation loc = l.at(run_fn, first_loop_body_pc(*l.module, run_fn));

    /// Checks the engine against the model for `trials` scripts built by
    /// `gen`. Returns the number of scripts in which at least one mutation
    /// happened during a firing.
    int check(uint32_t seed, const std::function<Script(std::mt19937&)>& gen)
    {
        std::mt19937 rng{seed};
        int mutating = 0;
        for (int t = 0; t < trials; ++t)
        {
            const Script s = gen(rng);
            const uint32_t n = std::uniform_int_distribution<uint32_t>{1, 6}(rng);
            const auto expected = model_log(s, n);
            const auto got = run_script(l, loc, s, {Value::i32(n)});
            EXPECT_EQ(got.log, expected) << "trial " << t;
            EXPECT_EQ(got.engine_final, got.final_live) << "trial " << t;
            EXPECT_EQ(l.engine->probed_location_count(), 0u);
            bool mutated = false;
            for (size_t k = 0; k < std::min(s.actions.size(), expected.size()); ++k)
                mutated |= s.actions[k].act != Act::none;
            mutating += mutated;
            if (HasFailure())
                return mutating;
        }
        return mutating;
    }
};

Script random_script(std::mt19937& rng, uint32_t max_initial, double p_insert, double p_remove)
{
    Script s;
    s.initial = std::uniform_int_distribution<uint32_t>{1, max_initial}(rng);
    std::uniform_real_distribution<double> coin{0, 1};
    const size_t len = std::uniform_int_distribution<size_t>{0, 40}(rng);
    for (size_t i = 0; i < len; ++i)
    {
        const double c = coin(rng);
        Action a;
        if (c < p_insert)
            a.act = Act::insert;
        else if (c < p_insert + p_remove)
            a.act = Act::remove;
        a.pick = static_cast<uint32_t>(rng());
        s.actions.push_back(a);
    }
    return s;
}
}  // namespace

TEST_F(Consistency, InsertionOrderIsFiringOrder)
{
    // Probes are inserted in a random order with interleaved removals
    // before the run; every occurrence must fire them in list order.
    std::mt19937 rng{11};
    for (int t = 0; t < trials; ++t)
    {
        std::vector<std::pair<uint32_t, ProbePtr>> live;
        std::vector<uint32_t> log;
        const int ops = std::uniform_int_distribution<int>{1, 20}(rng);
        for (int i = 0; i < ops; ++i)
        {
            if (!live.empty() && rng() % 3 == 0)
            {
                const size_t victim = rng() % live.size();
                l.engine->remove_probe(loc, live[victim].second);
                live.erase(live.begin() + victim);
                continue;
            }
            const uint32_t id = static_cast<uint32_t>(rng() % 1000);
            auto p = make_probe([&log, id](ProbeContext&) { log.push_back(id); });
            l.engine->insert_probe(loc, p);
            live.emplace_back(id, p);
        }
        const uint32_t n = std::uniform_int_distribution<uint32_t>{1, 5}(rng);
        l.run("run", {Value::i32(n)});
        std::vector<uint32_t> expected;
        for (uint32_t occ = 0; occ < n; ++occ)
            for (const auto& [id, p] : live)
                expected.push_back(id);
        ASSERT_EQ(log, expected) << "trial " << t;
        for (const auto& [id, p] : live)
            l.engine->remove_probe(loc, p);
    }
    // Model-checked scripts in which probes insert further probes.
    EXPECT_GT(check(12, [](std::mt19937& rng) { return random_script(rng, 6, 0.3, 0.0); }), trials / 2);
}

TEST_F(Consistency, DeferredInsertsOnSameEvent)
{
    const int mutating = check(21, [](std::mt19937& rng) { return random_script(rng, 4, 0.6, 0.0); });
    EXPECT_GT(mutating, trials / 2);

    // The direct form: a probe inserting a sibling at its own location.
    std::vector<std::string> log;
    ProbePtr late;
    auto first = make_probe([&](ProbeContext& c) {
        log.push_back("first");
        if (!late)
        {
            late = make_probe([&](ProbeContext&) { log.push_back("late"); });
            c.engine().insert_probe(c.location(), late);
        }
    });
    l.engine->insert_probe(loc, first);
    l.run("run", {Value::i32(2)});
    EXPECT_EQ(log, (std::vector<std::string>{"first", "first", "late"}));
}

TEST_F(Consistency, DeferredRemovalOnSameEvent)
{
    const int mutating = check(31, [](std::mt19937& rng) { return random_script(rng, 8, 0.0, 0.6); });
    EXPECT_GT(mutating, trials / 2);

    std::vector<std::string> log;
    ProbePtr second;
    auto first = make_probe([&](ProbeContext& c) {
        log.push_back("first");
        if (second)
        {
            c.engine().remove_probe(c.location(), second);
            second.reset();
        }
    });
    second = make_probe([&](ProbeContext&) { log.push_back("second"); });
    l.engine->insert_probe(loc, first);
    l.engine->insert_probe(loc, second);
    l.run("run", {Value::i32(2)});
    EXPECT_EQ(log, (std::vector<std::string>{"first", "second", "first"}));
}

TEST_F(Consistency, MixedInsertAndRemoveDuringFiring)
{
    EXPECT_GT(check(41, [](std::mt19937& rng) { return random_script(rng, 5, 0.3, 0.3); }), trials / 2);
}

TEST(OverwriteRestore, RandomInsertRemoveLeavesPristineBodies)
{
    std::mt19937 rng{5};
    uint64_t total_ops = 0;
    for (const auto& name : fixture_names())
    {
        Loaded l{name};
        std::vector<CodeLocation> sites;
        for (const auto& f : l.module->funcs)
            for (const auto& insn : disassemble(f))
                sites.push_back(l.at(f.index, insn.pc));
        if (sites.empty())
            continue;

        std::vector<ProbePtr> pool;
        for (int i = 0; i < 4; ++i)
        {
            pool.push_back(std::make_shared<CountProbe>());
            pool.push_back(make_probe([](ProbeContext&) {}));
        }
        std::vector<std::pair<CodeLocation, ProbePtr>> installed;
        std::vector<ProbePtr> globals;
        const auto is_installed = [&](const CodeLocation& at, const ProbePtr& p) {
            return std::any_of(installed.begin(), installed.end(),
                [&](const auto& e) { return e.first == at && e.second == p; });
        };
        const auto check_bodies = [&] {
            for (const auto& f : l.module->funcs)
                for (const auto& insn : disassemble(f))
                {
                    const bool probed = std::any_of(installed.begin(), installed.end(), [&](const auto& e) {
                        return e.first.func_index == f.index && e.first.pc == insn.pc;
                    });
                    ASSERT_EQ(f.body[insn.pc], probed ? op::probe : f.pristine_body[insn.pc]) << name;
                }
        };

        for (int i = 0; i < 600; ++i, ++total_ops)
        {
            const unsigned r = rng() % 10;
            if (r < 5 || installed.empty())
            {
                const auto at = sites[rng() % sites.size()];
                const auto p = pool[rng() % pool.size()];
                if (is_installed(at, p))
                    EXPECT_THROW(l.engine->insert_probe(at, p), DuplicateInsert);
                else
                {
                    l.engine->insert_probe(at, p);
                    installed.emplace_back(at, p);
                }
            }
            else if (r < 9)
            {
                const size_t victim = rng() % installed.size();
                l.engine->remove_probe(installed[victim].first, installed[victim].second);
                installed.erase(installed.begin() + victim);
            }
            else if (globals.empty() || rng() % 2)
            {
                globals.push_back(make_probe([](ProbeContext&) {}));
                l.engine->insert_global_probe(globals.back());
            }
            else
            {
                l.engine->remove_global_probe(globals.back());
                globals.pop_back();
            }
            if (i % 100 == 99)
                check_bodies();
        }
        std::shuffle(installed.begin(), installed.end(), rng);
        while (!installed.empty())
        {
            l.engine->remove_probe(installed.back().first, installed.back().second);
            installed.pop_back();
            ++total_ops;
        }
        for (const auto& g : globals)
            l.engine->remove_global_probe(g);
        EXPECT_EQ(l.engine->probed_location_count(), 0u);
        EXPECT_EQ(l.engine->dispatch_mode(), DispatchMode::normal);
        for (const auto& f : l.module->funcs)
            ASSERT_EQ(f.body, f.pristine_body) << name << " f" << f.index;
    }
    EXPECT_GE(total_ops, 10000u);
}

TEST(DanglingAccessor, UseAfterReturnAlwaysThrows)
{
    const Module m = load_fixture("calltree");
    std::mt19937 rng{77};
    int trials = 0, detected = 0;
    Loaded l{"calltree"};
    const uint32_t run_fn = l.export_index("run");
    // node is the callee of run's only call.
    uint32_t node = 0;
    for (const auto& insn : disassemble(*l.module->func(run_fn)))
        if (insn.opcode == op::call)
            node = static_cast<uint32_t>(insn.immediates.at(0));
    const auto use = [](FrameAccessor& a, unsigned which) {
        switch (which % 7)
        {
        case 0:
            return (void)a.get_local(0);
        case 1:
            return a.set_local(1, Value::i32(99));
        case 2:
            return (void)a.num_operands();
        case 3:
            return (void)a.pc();
        case 4:
            return (void)a.caller();
        case 5:
            return (void)a.depth();
        default:
            return (void)a.func_index();
        }
    };

    for (; trials < 1000; ++trials)
    {
        const int32_t seed = static_cast<int32_t>(rng());
        const int32_t depth = std::uniform_int_distribution<int32_t>{1, 5}(rng);
        const auto o = oracle::run(m, "run", {Value::i32(seed), Value::i32(depth)});
        const uint32_t visits = o.results.at(0).as_u32();
        const uint32_t target = std::uniform_int_distribution<uint32_t>{0, visits - 1}(rng);

        std::shared_ptr<FrameAccessor> kept;
        uint32_t kept_depth = 0;
        uint32_t firing = 0;
        int attempts = 0, thrown = 0;
        auto probe = make_probe([&](ProbeContext& c) {
            auto frame = c.frame();
            if (kept && frame->depth() <= kept_depth)
            {
                // A frame at this depth or shallower means the kept one has returned.
                ++attempts;
                EXPECT_FALSE(kept->valid());
                EXPECT_NE(frame.get(), kept.get());
                try
                {
                    use(*kept, static_cast<unsigned>(rng()));
                }
                catch (const StaleAccessor&)
                {
                    ++thrown;
                }
            }
            if (firing++ == target)
            {
                kept = frame;
                kept_depth = frame->depth();
            }
        });
        const auto at = l.at(node, 0);
        l.engine->insert_probe(at, probe);
        const auto r = l.run("run", {Value::i32(seed), Value::i32(depth)});
        l.engine->remove_probe(at, probe);
        ASSERT_TRUE(kept);
        for (unsigned which = 0; which < 7; ++which, ++attempts)
        {
            try
            {
                use(*kept, which);
            }
            catch (const StaleAccessor&)
            {
                ++thrown;
            }
        }
        EXPECT_EQ(r.values, o.results);
        // A clean run afterwards is unaffected.
        EXPECT_EQ(l.run("run", {Value::i32(seed), Value::i32(depth)}).values, o.results);
        EXPECT_EQ(l.instance->global_values(), o.globals);
        detected += attempts > 0 && thrown == attempts;
    }
    EXPECT_EQ(detected, trials);
}

namespace
{
struct FinalState
{
    std::vector<uint64_t> results;
    std::optional<TrapKind> trap;
    std::vector<uint8_t> memory;
    std::vector<uint64_t> globals;
    std::string output;

    friend bool operator==(const FinalState&, const FinalState&) = default;
};

enum class Mode
{
    uninstrumented,
    every_instruction,
    one_global,
};

FinalState run_fixture(const std::string& name, Mode mode)
{
    Loaded l{name, true};
    std::vector<std::pair<CodeLocation, ProbePtr>> installed;
    if (mode == Mode::every_instruction)
        for (const auto& f : l.module->funcs)
            for (const auto& insn : disassemble(f))
            {
                auto p = make_probe([](ProbeContext&) {});
                l.engine->insert_probe(l.at(f.index, insn.pc), p);
                installed.emplace_back(l.at(f.index, insn.pc), p);
            }
    if (mode == Mode::one_global)
        l.engine->insert_global_probe(make_probe([](ProbeContext&) {}));

    FinalState s;
    try
    {
        l.instantiate();
    }
    catch (const TrapError& e)
    {
        s.trap = e.trap().kind;
        return s;
    }
    const auto r = l.run();
    for (const auto& v : r.values)
        s.results.push_back(v.bits);
    if (r.trap)
        s.trap = r.trap->kind;
    s.memory = l.instance->memory;
    for (const auto& g : l.instance->global_values())
        s.globals.push_back(g.bits);
    s.output = l.out.str();
    return s;
}
}  // namespace

TEST(NonIntrusiveness, EmptyProbesLeaveFinalStateBitIdentical)
{
    const auto names = fixture_names();
    ASSERT_GE(names.size(), 15u);
    for (const auto& name : names)
    {
        const auto base = run_fixture(name, Mode::uninstrumented);
        EXPECT_EQ(run_fixture(name, Mode::every_instruction), base) << name;
        EXPECT_EQ(run_fixture(name, Mode::one_global), base) << name;
    }
}

TEST(Laziness, GenericProbesThatNeverAskAllocateNoAccessors)
{
    Loaded l{"hot_loop"};
    const uint32_t run_fn = l.export_index("run");
    uint64_t firings = 0;
    auto p = make_probe([&](ProbeContext&) { ++firings; });
    l.engine->insert_probe(l.at(run_fn, first_loop_body_pc(*l.module, run_fn)), p);
    const uint64_t before = FrameAccessor::allocation_count();
    l.run("run", {Value::i32(1'000'000)});
    EXPECT_EQ(firings, 1'000'000u);
    EXPECT_EQ(FrameAccessor::allocation_count(), before);

    // Control: asking for the frame does allocate, once per frame.
    auto asking = make_probe([](ProbeContext& c) { (void)c.frame(); });
    l.engine->insert_global_probe(asking);
    l.run("run", {Value::i32(10)});
    EXPECT_EQ(FrameAccessor::allocation_count(), before + 1);
}

TEST(OneAccessorPerFrame, AllFiringsInAFrameShareTheAccessor)
{
    for (const char* name : {"fib", "calltree", "nested_loops", "many_calls"})
    {
        Loaded l{name};
        std::map<uint64_t, std::shared_ptr<FrameAccessor>> seen;
        uint64_t mismatches = 0, firings = 0;
        l.engine->insert_global_probe(make_probe([&](ProbeContext& c) {
            auto f = c.frame();
            ++firings;
            auto [it, fresh] = seen.try_emplace(f->frame_id(), f);
            if (!fresh && it->second != f)
                ++mismatches;
        }));
        l.run();
        EXPECT_GT(firings, 0u);
        EXPECT_EQ(mismatches, 0u) << name;
    }
}

TEST(KindEquivalence, CounterFastPathMatchesGenericCounting)
{
    for (const auto& name : fixture_names())
    {
        Loaded counted{name, true}, generic{name, true};
        std::map<std::pair<uint32_t, uint32_t>, std::shared_ptr<CountProbe>> counters;
        std::map<std::pair<uint32_t, uint32_t>, uint64_t> tallies;
        for (const auto& f : counted.module->funcs)
            for (const auto& insn : disassemble(f))
            {
                const std::pair key{f.index, insn.pc};
                auto c = std::make_shared<CountProbe>();
                counted.engine->insert_probe(counted.at(f.index, insn.pc), c);
                counters[key] = c;
                tallies[key] = 0;
                generic.engine->insert_probe(generic.at(f.index, insn.pc),
                    make_probe([&tallies, key](ProbeContext&) { ++tallies[key]; }));
            }
        for (Loaded* l : {&counted, &generic})
        {
            try
            {
                l->instantiate();
                l->run();
            }
            catch (const TrapError&)
            {
            }
        }
        for (const auto& [key, c] : counters)
            EXPECT_EQ(c->count, tallies.at(key)) << name << " f" << key.first << "+" << key.second;
    }
}
