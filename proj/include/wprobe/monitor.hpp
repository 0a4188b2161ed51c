// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "engine.hpp"
#include "errors.hpp"
#include "execution.hpp"
#include "instance.hpp"
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wprobe
{
/// One machine-readable result. Serialized as
/// `monitor<TAB>func<TAB>pc<TAB>label<TAB>value`, with "-" for absent fields.
struct ReportRow
{
    std::string monitor;
    std::optional<uint32_t> func;
    std::optional<uint32_t> pc;
    std::string label;
    std::string value;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct Report
{
    std::string monitor;
    std::string text;
    std::vector<ReportRow> rows;

    friend bool operator==(const Report&, const Report&) = default;
};

std::string to_tsv(const ReportRow& row);
std::string to_tsv(const Report& report);

/// A self-contained analysis: instruments a module when it is loaded,
/// observes the run through probes, and reports afterwards.
class Monitor
{
public:
    virtual ~Monitor() = default;

    virtual std::string_view name() const noexcept = 0;
    /// Installs probes. Runs before the module is instantiated, so the start
    /// function is observed as well.
    virtual void on_load(Engine& engine, Module& module) = 0;
    virtual void on_instantiate(Instance&) {}
    /// Called by the driver each time the execution pauses.
    virtual void on_pause(Execution&) {}
    /// Called once after the run has ended.
    virtual void on_finish() {}
    /// The engine is about to be destroyed. Instrumentation must be removed
    /// and references to the engine dropped; report() stays valid.
    virtual void on_unload() {}
    virtual Report report() const = 0;
};

class UnknownMonitor : public Error
{
public:
    explicit UnknownMonitor(std::string_view name) : Error("unknown monitor: " + std::string(name)) {}
};

/// Streams monitors use for interactive or bulk output.
struct MonitorEnv
{
    /// Trace lines.
    std::ostream* trace_out = nullptr;
    /// Debugger console.
    std::istream* console_in = nullptr;
    std::ostream* console_out = nullptr;
};

struct MonitorInfo
{
    std::string_view name;
    std::string_view description;
};

/// The registered monitors, in listing order.
const std::vector<MonitorInfo>& list_monitors();

/// Creates a monitor from "name" or "name:variant". Variants: hotness:generic
/// (generic probes instead of counters), hotness:global and branch:global
/// (one global probe filtering by location). Throws UnknownMonitor.
std::unique_ptr<Monitor> create_monitor(std::string_view spec, const MonitorEnv& env);
}  // namespace wprobe
