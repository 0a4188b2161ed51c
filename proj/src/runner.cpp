// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/runner.hpp"
#include "wprobe/binary.hpp"
#include "wprobe/engine.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/instance.hpp"
#include "wprobe/validator.hpp"
#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace wprobe
{
namespace
{
/// FNV-1a.
class Digest
{
public:
    void add(const void* data, size_t n) noexcept
    {
        const auto* p = static_cast<const uint8_t*>(data);
        for (size_t i = 0; i < n; ++i)
            h_ = (h_ ^ p[i]) * 0x100000001b3ULL;
    }
    template <typename T>
    void add(const T& v) noexcept
    {
        add(&v, sizeof v);
    }
    uint64_t value() const noexcept { return h_; }

private:
    uint64_t h_ = 0xcbf29ce484222325ULL;
};

uint64_t digest_state(const Instance& inst, const RunResult& r)
{
    Digest d;
    d.add(inst.memory.data(), inst.memory.size());
    d.add(inst.globals.data(), inst.globals.size() * sizeof(uint64_t));
    if (r.result)
    {
        for (const auto& v : r.result->values)
        {
            d.add(v.type);
            d.add(v.bits);
        }
        d.add(r.result->trap ? static_cast<int>(r.result->trap->kind) : -1);
    }
    d.add(r.start_trap ? static_cast<int>(r.start_trap->kind) : -1);
    return d.value();
}

std::vector<Value> parse_args(const FuncType& type, const std::vector<std::string>& args)
{
    if (args.size() != type.params.size())
        throw ArgumentMismatch("entry function takes " + std::to_string(type.params.size()) + " argument(s), " +
                               std::to_string(args.size()) + " given");
    std::vector<Value> out;
    for (size_t i = 0; i < args.size(); ++i)
    {
        const auto v = parse_value(args[i], type.params[i]);
        if (!v || v->type != type.params[i])
            throw ArgumentMismatch("cannot parse argument '" + args[i] + "' as " +
                                   std::string(to_string(type.params[i])));
        out.push_back(*v);
    }
    return out;
}

struct NullBuffer final : std::streambuf
{
    int overflow(int c) override { return c; }
};
}  // namespace

std::vector<std::unique_ptr<Monitor>> create_monitors(const std::vector<std::string>& specs, const MonitorEnv& env)
{
    std::vector<std::unique_ptr<Monitor>> out;
    for (const auto& s : specs)
        out.push_back(create_monitor(s, env));
    return out;
}

RunResult run_module(std::span<const uint8_t> wasm, const std::vector<Monitor*>& monitors, const RunOptions& options)
{
    RunResult r;
    NullBuffer null_buf;
    std::ostream null_out{&null_buf};
    std::ostream& out = options.program_out ? *options.program_out : null_out;

    Engine engine;
    struct Unload
    {
        const std::vector<Monitor*>& monitors;
        ~Unload()
        {
            for (auto* m : monitors)
            {
                try
                {
                    m->on_unload();
                }
                catch (...)
                {
                }
            }
        }
    } unload{monitors};
    engine.set_empty_probes(options.empty_probes);
    engine.set_stripped_interpreter(options.stripped);
    Module* module = nullptr;
    try
    {
        auto parsed = parse_module(wasm);
        validate_or_throw(parsed);
        module = &engine.load(std::move(parsed));
    }
    catch (const Error& e)
    {
        r.exit_code = exit_usage;
        r.error = e.what();
        return r;
    }

    const auto on_pause = [&](Execution& exec) {
        for (auto* m : monitors)
            m->on_pause(exec);
    };
    const auto collect = [&] {
        for (auto* m : monitors)
            m->on_finish();
        for (auto* m : monitors)
            r.reports.push_back(m->report());
    };

    std::unique_ptr<Instance> instance;
    try
    {
        for (auto* m : monitors)
            m->on_load(engine, *module);

        std::optional<uint32_t> entry;
        if (!options.entry.empty())
            entry = module->find_export(options.entry, ExternalKind::function);
        else
            entry = find_entry_point(*module);
        if (!entry)
        {
            r.exit_code = exit_usage;
            r.error = options.entry.empty() ? "module exports neither main nor _start"
                                            : "no such export: " + options.entry;
            return r;
        }
        const auto args = parse_args(module->func_type(*entry), options.args);

        try
        {
            instance = engine.instantiate(*module, builtin_imports(out), on_pause);
        }
        catch (const TrapError& e)
        {
            r.start_trap = e.trap();
            r.exit_code = exit_trap;
            r.error = e.what();
        }
        if (instance)
        {
            for (auto* m : monitors)
                m->on_instantiate(*instance);
            Execution exec{*instance, *entry, args};
            while (exec.run() == ExecStatus::paused)
                on_pause(exec);
            r.result = exec.result();
            if (r.result->trapped())
                r.exit_code = exit_trap;
        }
        collect();
    }
    catch (const MonitorError& e)
    {
        r.exit_code = exit_monitor_error;
        r.error = e.what();
        return r;
    }
    catch (const ArgumentMismatch& e)
    {
        r.exit_code = exit_usage;
        r.error = e.what();
        return r;
    }
    catch (const LinkError& e)
    {
        r.exit_code = exit_usage;
        r.error = e.what();
        return r;
    }
    catch (const std::exception& e)
    {
        // Anything else escaping here was raised by monitor code outside a probe.
        r.exit_code = exit_monitor_error;
        r.error = e.what();
        return r;
    }
    if (instance)
        r.state_digest = digest_state(*instance, r);
    out.flush();
    return r;
}

BenchResult bench(std::span<const uint8_t> wasm, const std::vector<std::string>& monitor_specs,
    const BenchOptions& options)
{
    using clock = std::chrono::steady_clock;
    struct Config
    {
        std::string name;
        std::optional<std::string> spec;
        bool empty;
        std::vector<std::chrono::nanoseconds> times;
    };
    std::vector<Config> configs{{"none", std::nullopt, false, {}}};
    for (const auto& s : monitor_specs)
    {
        configs.push_back({s, s, false, {}});
        if (options.empty_probes)
            configs.push_back({s, s, true, {}});
    }

    BenchResult result;
    std::optional<uint64_t> reference;
    const unsigned reps = std::max(1u, options.repetitions);
    for (unsigned rep = 0; rep < reps; ++rep)
        for (auto& c : configs)
        {
            auto opts = options.run;
            opts.empty_probes = c.empty;
            std::vector<std::unique_ptr<Monitor>> owned;
            std::ostringstream sink;
            const auto start = clock::now();
            try
            {
                if (c.spec)
                    owned = create_monitors({*c.spec}, MonitorEnv{&sink, nullptr, nullptr});
            }
            catch (const Error& e)
            {
                RunResult failed;
                failed.exit_code = exit_usage;
                failed.error = e.what();
                result.failure = std::move(failed);
                return result;
            }
            std::vector<Monitor*> ptrs;
            for (auto& m : owned)
                ptrs.push_back(m.get());
            RunResult r = run_module(wasm, ptrs, opts);
            c.times.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start));
            if (r.exit_code != exit_ok && r.exit_code != exit_trap)
            {
                result.failure = std::move(r);
                return result;
            }
            if (!reference)
                reference = r.state_digest;
            else if (*reference != r.state_digest)
                result.warnings.push_back("NonDeterministicFixture: final state of run " + std::to_string(rep + 1) +
                                          " (" + c.name + (c.empty ? ", empty probes" : "") +
                                          ") differs from the first run");
        }

    const auto median = [](std::vector<std::chrono::nanoseconds> v) {
        std::sort(v.begin(), v.end());
        const size_t n = v.size();
        return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
    };
    const auto base = median(configs[0].times);
    for (const auto& c : configs)
    {
        if (c.empty)
        {
            result.rows.back().empty_median = median(c.times);
            continue;
        }
        BenchRow row;
        row.config = c.name;
        row.median = median(c.times);
        row.relative = base.count() ? double(row.median.count()) / double(base.count()) : 1.0;
        row.overhead = row.median - base;
        result.rows.push_back(row);
    }
    return result;
}

std::string format_bench(const BenchResult& result)
{
    const auto ms = [](std::chrono::nanoseconds ns) { return double(ns.count()) / 1e6; };
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %12s %12s %10s %14s %14s\n", "config", "median_ms", "overhead_ms",
        "relative", "empty_probe_ms", "monitor_ms");
    out += line;
    for (const auto& row : result.rows)
    {
        std::string empty = "-", monitor = "-";
        if (row.empty_median)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", ms(*row.empty_median));
            empty = buf;
            std::snprintf(buf, sizeof buf, "%.3f", ms(row.median - *row.empty_median));
            monitor = buf;
        }
        std::snprintf(line, sizeof line, "%-20s %12.3f %12.3f %10.3f %14s %14s\n", row.config.c_str(),
            ms(row.median), ms(row.overhead), row.relative, empty.c_str(), monitor.c_str());
        out += line;
    }
    for (const auto& w : result.warnings)
        out += "warning: " + w + '\n';
    return out;
}
}  // namespace wprobe
