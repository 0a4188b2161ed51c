// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "disassembler.hpp"
#include "monitor.hpp"
#include "probe.hpp"
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace wprobe
{
class Debugger;

/// Frame- or resume-related command issued while the execution is running.
class NotPaused : public Error
{
public:
    NotPaused() : Error("not paused") {}
};

struct FrameInfo
{
    /// 1 for the entry frame.
    uint32_t depth = 0;
    uint32_t func = 0;
    uint32_t pc = 0;
    std::string instruction;
};

/// The party steering a debugger: a console, a network client, a test.
/// All callbacks run on the engine context.
class DebugSession
{
public:
    virtual ~DebugSession() = default;

    /// The execution is paused. Inspect and modify state through `dbg`, then
    /// return. The execution resumes according to the last resume command
    /// (continue when none was given).
    virtual void paused(Debugger& dbg, Execution& exec) = 0;

    /// Called periodically while running (function entries and loop
    /// headers), for example to handle a pause request.
    virtual void poll(Debugger&) {}

    /// The run has ended.
    virtual void finished(Debugger&) {}
};

/// Breakpoints, single-step, step-over, watchpoints and frame inspection
/// built from probes. Usable as a monitor; pauses are delivered to the
/// attached session from on_pause. Call on_unload() before destroying the
/// engine if the debugger outlives it.
class Debugger final : public Monitor
{
public:
    explicit Debugger(std::shared_ptr<DebugSession> session = nullptr, bool pause_at_entry = true);
    ~Debugger() override;

    std::string_view name() const noexcept override { return "debugger"; }
    void on_load(Engine& engine, Module& module) override;
    void on_instantiate(Instance& instance) override;
    void on_pause(Execution& exec) override;
    void on_finish() override;
    void on_unload() override;
    Report report() const override;

    /// Throws InvalidLocation unless (func, pc) is an instruction boundary
    /// of a defined function of the loaded module.
    void set_breakpoint(uint32_t func, uint32_t pc);
    /// Returns false when no breakpoint was set there.
    bool remove_breakpoint(uint32_t func, uint32_t pc);
    std::vector<CodeLocation> breakpoints() const;

    /// Resume commands; valid while paused. They record how the execution
    /// continues once the session returns from paused().
    void resume();
    void step();
    /// Steps over calls: pauses at the instruction after the call in the
    /// same frame. Behaves like step() for other instructions.
    void step_over();
    bool resume_requested() const noexcept { return resume_requested_; }

    /// Requests a pause while running. Only meaningful from poll().
    void pause();

    /// Experimental: pauses with reason "watchpoint" at the first boundary
    /// after local `index` of any frame of `func` changes value. Returns an
    /// id for unwatch().
    uint32_t watch_local(uint32_t func, uint32_t index);
    bool unwatch(uint32_t id);

    bool paused() const noexcept { return current_ != nullptr; }
    CodeLocation location() const;
    const std::string& pause_reason() const;

    /// Innermost frame first.
    std::vector<FrameInfo> stack() const;
    /// `level` counts frames below the innermost one.
    std::vector<Value> locals(uint32_t level = 0) const;
    /// Top of the operand stack first.
    std::vector<Value> operands(uint32_t level = 0) const;
    void set_local(uint32_t index, Value v, uint32_t level = 0);
    void set_operand(uint32_t k, Value v, uint32_t level = 0);

    /// Listing of a defined function. Throws InvalidLocation.
    std::vector<Instruction> disassemble(uint32_t func) const;
    const Module* module() const noexcept { return module_; }

    uint64_t pause_count() const noexcept { return pauses_; }
    uint64_t breakpoint_hits() const noexcept { return breakpoint_hits_; }

private:
    struct Watch
    {
        uint32_t func;
        uint32_t index;
        /// Last seen value per frame id.
        std::map<uint64_t, Value> seen;
    };

    Execution& require_paused() const;
    const FuncDecl& defined_func(uint32_t func, uint32_t pc_for_error = 0) const;
    void arm_step(std::string reason);
    void cancel_steps();
    void update_watch_probe();

    std::shared_ptr<DebugSession> session_;
    bool pause_at_entry_;
    Engine* engine_ = nullptr;
    Module* module_ = nullptr;
    Execution* current_ = nullptr;
    bool resume_requested_ = false;
    size_t exit_listener_ = SIZE_MAX;

    std::map<CodeLocation, ProbePtr> breakpoints_;
    ProbePtr step_probe_;
    std::pair<CodeLocation, ProbePtr> step_over_probe_;
    std::vector<std::pair<CodeLocation, ProbePtr>> poll_probes_;

    std::map<uint32_t, Watch> watches_;
    uint32_t next_watch_ = 1;
    ProbePtr watch_probe_;

    uint64_t pauses_ = 0;
    uint64_t breakpoint_hits_ = 0;
    uint64_t watch_hits_ = 0;
};

/// Line-oriented console session. Commands: break F P, delete F P,
/// continue, step, next, stack, locals [L], operands [L], set local|operand
/// I VALUE, dis F, watch F I, unwatch ID, info, help, quit. End of input
/// or quit detaches: breakpoints are cleared and the program runs to the
/// end.
std::shared_ptr<DebugSession> make_console_session(std::istream& in, std::ostream& out);
}  // namespace wprobe
