// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "execution.hpp"
#include "monitor.hpp"
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wprobe
{
enum ExitCode : int
{
    exit_ok = 0,
    exit_trap = 1,
    exit_usage = 2,
    exit_monitor_error = 3,
};

struct RunOptions
{
    /// Exported function to call; "main", else "_start" when empty.
    std::string entry;
    /// Program arguments, parsed against the entry function's parameters.
    std::vector<std::string> args;
    bool empty_probes = false;
    /// Use the interpreter variant compiled without probe support. Only
    /// valid without monitors.
    bool stripped = false;
    /// Receives the program's own output (print_i32 and friends).
    std::ostream* program_out = nullptr;
};

struct RunResult
{
    int exit_code = exit_ok;
    /// Set once the entry function ran (also when it trapped).
    std::optional<InvokeResult> result;
    /// Trap raised by the start function.
    std::optional<Trap> start_trap;
    /// Reports of every monitor, in the order given, once the program ended.
    std::vector<Report> reports;
    /// Diagnostic for exit codes 2 and 3.
    std::string error;
    /// Hash of final memory, globals, results and trap kind.
    uint64_t state_digest = 0;
};

/// Creates monitors from "name[:variant]" specs. Throws UnknownMonitor.
std::vector<std::unique_ptr<Monitor>> create_monitors(const std::vector<std::string>& specs, const MonitorEnv& env);

/// Parses, validates and loads `wasm`, lets each monitor instrument it,
/// instantiates, runs the entry function and collects reports. Pauses are
/// handed to every monitor's on_pause. Errors map to exit codes and never
/// escape.
RunResult run_module(std::span<const uint8_t> wasm, const std::vector<Monitor*>& monitors, const RunOptions& options);

struct BenchRow
{
    /// "none" for the uninstrumented baseline.
    std::string config;
    /// Median wall time of the whole run.
    std::chrono::nanoseconds median{};
    /// Same monitor with empty probes; absent for the baseline.
    std::optional<std::chrono::nanoseconds> empty_median;
    /// T_i / T_u.
    double relative = 1.0;
    /// T_i - T_u.
    std::chrono::nanoseconds overhead{};
};

struct BenchResult
{
    std::vector<BenchRow> rows;
    /// NonDeterministicFixture warnings.
    std::vector<std::string> warnings;
    /// Set when a run failed (exit code other than 0 or 1).
    std::optional<RunResult> failure;
};

struct BenchOptions
{
    unsigned repetitions = 5;
    /// Also time every configuration in empty-probe mode.
    bool empty_probes = false;
    RunOptions run;
};

/// Times the module uninstrumented and once per monitor spec, `repetitions`
/// times each with the configurations interleaved.
BenchResult bench(std::span<const uint8_t> wasm, const std::vector<std::string>& monitor_specs,
    const BenchOptions& options);

/// Aligned table of bench rows.
std::string format_bench(const BenchResult& result);
}  // namespace wprobe
