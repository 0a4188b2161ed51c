// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "frame_accessor.hpp"
#include "instance.hpp"
#include "types.hpp"
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wprobe
{
enum class ExecStatus : uint8_t
{
    ready,
    paused,
    running,
    returned,
    trapped,
    aborted,
};

std::string_view to_string(ExecStatus status) noexcept;

enum class StepOutcome : uint8_t
{
    continued,
    returned,
    trapped,
};

struct InvokeResult
{
    std::vector<Value> values;
    std::optional<Trap> trap;

    bool trapped() const noexcept { return trap.has_value(); }
};

/// One invocation of a function. Runs until it returns, traps, or pauses at
/// an instruction boundary. A pause takes effect after all probes at the
/// boundary have fired, before the instruction executes; resuming runs that
/// instruction without firing its probes again.
class Execution
{
public:
    /// Throws ArgumentMismatch when `args` do not match the signature, or
    /// Error when the engine already has an active execution.
    Execution(Instance& instance, uint32_t func_index, std::vector<Value> args);
    ~Execution();
    Execution(const Execution&) = delete;
    Execution& operator=(const Execution&) = delete;

    /// Runs until finished or paused. Throws MonitorError if a probe throws;
    /// the execution is then aborted.
    ExecStatus run();

    /// Executes exactly one instruction (firing its probes if they have not
    /// fired yet) and stops at the next boundary after its probes fire.
    StepOutcome step();

    /// Pauses at the current boundary once its probes have fired. Meant for
    /// probe code; the first reason given for a boundary is kept.
    void request_pause(std::string reason);

    ExecStatus status() const noexcept;
    bool finished() const noexcept;
    const std::string& pause_reason() const noexcept;

    /// Boundary the execution is stopped at (ready or paused).
    CodeLocation location() const;
    uint32_t depth() const noexcept;
    /// Accessor for the frame `level` frames below the innermost one.
    std::shared_ptr<FrameAccessor> frame(uint32_t level = 0) const;

    const std::vector<Value>& results() const noexcept;
    const std::optional<Trap>& trap() const noexcept;
    InvokeResult result() const;

    /// Unique per execution within the process.
    uint64_t serial() const noexcept;
    Instance& instance() const noexcept;
    uint32_t entry_function() const noexcept;

    ExecState& state() noexcept { return *state_; }

private:
    void finish();

    std::shared_ptr<ExecState> state_;
};

using PauseHandler = std::function<void(Execution&)>;

/// Runs an exported function to completion. Each time the execution pauses,
/// `on_pause` is called; when it returns the execution continues. Throws
/// NoSuchExport, ArgumentMismatch, MonitorError.
InvokeResult invoke(Instance& instance, std::string_view export_name, std::vector<Value> args = {},
    const PauseHandler& on_pause = {});

/// Entry point resolution for programs: "main", else "_start".
std::optional<uint32_t> find_entry_point(const Module& module) noexcept;
}  // namespace wprobe
