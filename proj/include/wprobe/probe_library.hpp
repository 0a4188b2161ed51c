// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "engine.hpp"
#include "probe.hpp"
#include <functional>
#include <memory>

namespace wprobe
{
/// Higher-level hooks composed from local and global probes. Handles remove
/// their probes when destroyed and must not outlive the engine.

using FrameCallback = std::function<void(ProbeContext&)>;

class EntryExitHooks
{
public:
    struct State;
    explicit EntryExitHooks(std::shared_ptr<State> state) noexcept;
    ~EntryExitHooks();
    EntryExitHooks(const EntryExitHooks&) = delete;
    EntryExitHooks& operator=(const EntryExitHooks&) = delete;

    void remove();

private:
    std::shared_ptr<State> state_;
};

/// Calls `on_entry` once per new frame of the function and `on_exit` before
/// each normal return from such a frame (return, the final end, or a branch
/// out of the function body). Frames left by a trap get no exit call.
std::unique_ptr<EntryExitHooks> instrument_entry_exit(Engine& engine, const Module& module,
    uint32_t func_index, FrameCallback on_entry, FrameCallback on_exit);

class AfterInstructionHook
{
public:
    struct State;
    explicit AfterInstructionHook(std::shared_ptr<State> state) noexcept;
    ~AfterInstructionHook();
    AfterInstructionHook(const AfterInstructionHook&) = delete;
    AfterInstructionHook& operator=(const AfterInstructionHook&) = delete;

    void remove();

private:
    std::shared_ptr<State> state_;
};

/// Fires `probe` (through Probe::fire) once at the instruction that executes
/// next after each execution of `loc`, which may be in a callee or at a branch
/// target. Nothing fires when the execution ends or traps first.
std::unique_ptr<AfterInstructionHook> after_instruction(Engine& engine, const CodeLocation& loc, ProbePtr probe);
}  // namespace wprobe
