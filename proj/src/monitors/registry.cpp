// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"

namespace wprobe
{
namespace
{
std::string field(const std::optional<uint32_t>& v)
{
    return v ? std::to_string(*v) : "-";
}
}  // namespace

std::string to_tsv(const ReportRow& row)
{
    return row.monitor + '\t' + field(row.func) + '\t' + field(row.pc) + '\t' + row.label + '\t' + row.value;
}

std::string to_tsv(const Report& report)
{
    std::string out;
    for (const auto& row : report.rows)
        out += to_tsv(row) + '\n';
    return out;
}

const std::vector<MonitorInfo>& list_monitors()
{
    static const std::vector<MonitorInfo> infos{
        {"trace", "prints every executed instruction with call depth and operand stack"},
        {"coverage", "records which instructions ran, removing each probe after its first hit"},
        {"loop", "counts executions of every loop header"},
        {"hotness", "counts executions of every instruction"},
        {"branch", "profiles the direction of if, br_if and br_table"},
        {"memory", "logs every load and store with address and value"},
        {"calls", "counts call edges, resolving call_indirect targets"},
        {"debugger", "interactive breakpoints, stepping and frame inspection"},
    };
    return infos;
}

std::unique_ptr<Monitor> create_monitor(std::string_view spec, const MonitorEnv& env)
{
    const auto colon = spec.find(':');
    const std::string_view name = spec.substr(0, colon);
    const std::string_view variant = colon == std::string_view::npos ? "" : spec.substr(colon + 1);
    if (colon != std::string_view::npos && variant.empty())
        throw UnknownMonitor(spec);

    if (name == "hotness" && (variant.empty() || variant == "generic" || variant == "global"))
        return monitors::make_hotness(variant);
    if (name == "branch" && (variant.empty() || variant == "global"))
        return monitors::make_branch(variant);
    if (!variant.empty())
        throw UnknownMonitor(spec);
    if (name == "trace")
        return monitors::make_trace(env.trace_out);
    if (name == "coverage")
        return monitors::make_coverage();
    if (name == "loop")
        return monitors::make_loop();
    if (name == "memory")
        return monitors::make_memory();
    if (name == "calls")
        return monitors::make_calls();
    if (name == "debugger")
        return monitors::make_debugger(env);
    throw UnknownMonitor(spec);
}
}  // namespace wprobe
