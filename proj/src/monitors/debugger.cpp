// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/debugger.hpp"
#include "common.hpp"
#include "wprobe/frame_accessor.hpp"
#include "wprobe/opcodes.hpp"

namespace wprobe
{
Debugger::Debugger(std::shared_ptr<DebugSession> session, bool pause_at_entry)
  : session_{std::move(session)}, pause_at_entry_{pause_at_entry}
{}

Debugger::~Debugger()
{
    on_unload();
}

void Debugger::on_unload()
{
    if (!engine_)
        return;
    try
    {
        cancel_steps();
        for (const auto& [loc, p] : breakpoints_)
            engine_->remove_probe(loc, p);
        for (const auto& [loc, p] : poll_probes_)
            engine_->remove_probe(loc, p);
        if (watch_probe_)
            engine_->remove_global_probe(watch_probe_);
        engine_->remove_exit_listener(exit_listener_);
    }
    catch (const Error&)
    {
    }
    breakpoints_.clear();
    poll_probes_.clear();
    watch_probe_.reset();
    engine_ = nullptr;
}

void Debugger::on_load(Engine& engine, Module& module)
{
    engine_ = &engine;
    module_ = &module;
    exit_listener_ = engine.add_exit_listener([this](Execution&) {
        cancel_steps();
        for (auto& [id, w] : watches_)
            w.seen.clear();
    });
    if (!session_)
        return;
    auto poll = make_probe([this](ProbeContext&) { session_->poll(*this); });
    for (const auto& f : module.funcs)
        for (const auto& insn : wprobe::disassemble(f))
            if (insn.pc == 0 || insn.opcode == op::loop)
            {
                const CodeLocation loc{module.id, f.index, insn.opcode == op::loop ? insn.pc + insn.length : 0};
                engine.insert_probe(loc, poll);
                poll_probes_.emplace_back(loc, poll);
            }
}

void Debugger::on_instantiate(Instance&)
{
    if (pause_at_entry_)
        arm_step("entry");
}

void Debugger::on_pause(Execution& exec)
{
    ++pauses_;
    cancel_steps();
    current_ = &exec;
    resume_requested_ = false;
    try
    {
        if (session_)
            session_->paused(*this, exec);
    }
    catch (...)
    {
        current_ = nullptr;
        throw;
    }
    current_ = nullptr;
}

void Debugger::on_finish()
{
    if (session_)
        session_->finished(*this);
}

Report Debugger::report() const
{
    Report r{"debugger", {}, {}};
    r.rows.push_back({"debugger", std::nullopt, std::nullopt, "pauses", std::to_string(pauses_)});
    r.rows.push_back({"debugger", std::nullopt, std::nullopt, "breakpoint_hits", std::to_string(breakpoint_hits_)});
    r.rows.push_back({"debugger", std::nullopt, std::nullopt, "watchpoint_hits", std::to_string(watch_hits_)});
    r.text = "pauses: " + std::to_string(pauses_) + "\nbreakpoint hits: " + std::to_string(breakpoint_hits_) +
             "\nwatchpoint hits: " + std::to_string(watch_hits_) + '\n';
    return r;
}

const FuncDecl& Debugger::defined_func(uint32_t func, uint32_t pc_for_error) const
{
    const uint32_t imports = module_ ? module_->num_imported_funcs() : 0;
    if (!module_ || func < imports || func - imports >= module_->funcs.size())
        throw InvalidLocation(CodeLocation{module_ ? module_->id : 0, func, pc_for_error});
    return module_->funcs[func - imports];
}

void Debugger::set_breakpoint(uint32_t func, uint32_t pc)
{
    defined_func(func, pc);
    const CodeLocation loc{module_->id, func, pc};
    if (!engine_->is_instruction_boundary(loc))
        throw InvalidLocation(loc);
    if (breakpoints_.count(loc))
        return;
    auto p = make_probe([this](ProbeContext& ctx) {
        ++breakpoint_hits_;
        ctx.execution().request_pause("breakpoint");
    });
    engine_->insert_probe(loc, p);
    breakpoints_.emplace(loc, std::move(p));
}

bool Debugger::remove_breakpoint(uint32_t func, uint32_t pc)
{
    if (!module_)
        return false;
    const auto it = breakpoints_.find(CodeLocation{module_->id, func, pc});
    if (it == breakpoints_.end())
        return false;
    engine_->remove_probe(it->first, it->second);
    breakpoints_.erase(it);
    return true;
}

std::vector<CodeLocation> Debugger::breakpoints() const
{
    std::vector<CodeLocation> out;
    for (const auto& [loc, p] : breakpoints_)
        out.push_back(loc);
    return out;
}

Execution& Debugger::require_paused() const
{
    if (!current_)
        throw NotPaused();
    return *current_;
}

void Debugger::resume()
{
    require_paused();
    cancel_steps();
    resume_requested_ = true;
}

void Debugger::step()
{
    require_paused();
    cancel_steps();
    arm_step("step");
    resume_requested_ = true;
}

void Debugger::step_over()
{
    auto& exec = require_paused();
    cancel_steps();
    const auto loc = exec.location();
    const auto& f = defined_func(loc.func_index, loc.pc);
    const auto insn = decode_instruction(f.pristine_body, loc.pc);
    if (insn.opcode == op::call || insn.opcode == op::call_indirect)
    {
        const uint64_t frame_id = exec.frame()->frame_id();
        const CodeLocation next{loc.module_id, loc.func_index, loc.pc + insn.length};
        auto p = make_probe([this, frame_id](ProbeContext& ctx) {
            if (ctx.frame()->frame_id() != frame_id)
                return;
            ctx.execution().request_pause("step");
            cancel_steps();
        });
        engine_->insert_probe(next, p);
        step_over_probe_ = {next, std::move(p)};
    }
    else
        arm_step("step");
    resume_requested_ = true;
}

void Debugger::pause()
{
    if (current_)
        return;
    Execution* exec = engine_ ? engine_->current_execution() : nullptr;
    if (exec)
        exec->request_pause("pause");
}

void Debugger::arm_step(std::string reason)
{
    step_probe_ = make_probe([this, reason = std::move(reason)](ProbeContext& ctx) {
        ctx.execution().request_pause(reason);
        cancel_steps();
    });
    engine_->insert_global_probe(step_probe_);
}

void Debugger::cancel_steps()
{
    if (step_probe_)
    {
        engine_->remove_global_probe(step_probe_);
        step_probe_.reset();
    }
    if (step_over_probe_.second)
    {
        engine_->remove_probe(step_over_probe_.first, step_over_probe_.second);
        step_over_probe_.second.reset();
    }
}

uint32_t Debugger::watch_local(uint32_t func, uint32_t index)
{
    const auto& f = defined_func(func);
    if (index >= f.num_locals())
        throw IndexOutOfRange("local " + std::to_string(index) + " out of range");
    const uint32_t id = next_watch_++;
    watches_.emplace(id, Watch{func, index, {}});
    update_watch_probe();
    return id;
}

bool Debugger::unwatch(uint32_t id)
{
    const bool erased = watches_.erase(id) > 0;
    update_watch_probe();
    return erased;
}

void Debugger::update_watch_probe()
{
    if (watches_.empty() && watch_probe_)
    {
        engine_->remove_global_probe(watch_probe_);
        watch_probe_.reset();
    }
    else if (!watches_.empty() && !watch_probe_)
    {
        const uint32_t module_id = module_->id;
        watch_probe_ = make_probe([this, module_id](ProbeContext& ctx) {
            const auto& loc = ctx.location();
            if (loc.module_id != module_id)
                return;
            bool hit = false;
            for (auto& [id, w] : watches_)
            {
                if (w.func != loc.func_index)
                    continue;
                const auto frame = ctx.frame();
                const Value v = frame->get_local(w.index);
                const auto [it, fresh] = w.seen.try_emplace(frame->frame_id(), v);
                if (!fresh && it->second != v)
                {
                    it->second = v;
                    hit = true;
                }
            }
            if (hit)
            {
                ++watch_hits_;
                ctx.execution().request_pause("watchpoint");
            }
        });
        engine_->insert_global_probe(watch_probe_);
    }
}

CodeLocation Debugger::location() const
{
    return require_paused().location();
}

const std::string& Debugger::pause_reason() const
{
    return require_paused().pause_reason();
}

std::vector<FrameInfo> Debugger::stack() const
{
    auto& exec = require_paused();
    std::vector<FrameInfo> out;
    for (uint32_t level = 0; level < exec.depth(); ++level)
    {
        const auto f = exec.frame(level);
        FrameInfo info{f->depth(), f->func_index(), f->pc(), {}};
        info.instruction = format_instruction(decode_instruction(f->func().pristine_body, info.pc));
        out.push_back(std::move(info));
    }
    return out;
}

std::vector<Value> Debugger::locals(uint32_t level) const
{
    const auto f = require_paused().frame(level);
    std::vector<Value> out;
    for (uint32_t i = 0; i < f->num_locals(); ++i)
        out.push_back(f->get_local(i));
    return out;
}

std::vector<Value> Debugger::operands(uint32_t level) const
{
    const auto f = require_paused().frame(level);
    std::vector<Value> out;
    for (uint32_t k = 0; k < f->num_operands(); ++k)
        out.push_back(f->get_operand(k));
    return out;
}

void Debugger::set_local(uint32_t index, Value v, uint32_t level)
{
    require_paused().frame(level)->set_local(index, v);
}

void Debugger::set_operand(uint32_t k, Value v, uint32_t level)
{
    require_paused().frame(level)->set_operand(k, v);
}

std::vector<Instruction> Debugger::disassemble(uint32_t func) const
{
    return wprobe::disassemble(defined_func(func));
}

namespace monitors
{
std::unique_ptr<Monitor> make_debugger(const MonitorEnv& env)
{
    std::shared_ptr<DebugSession> session;
    if (env.console_in && env.console_out)
        session = make_console_session(*env.console_in, *env.console_out);
    return std::make_unique<Debugger>(std::move(session));
}
}  // namespace monitors
}  // namespace wprobe
