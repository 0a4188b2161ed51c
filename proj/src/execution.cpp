// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "engine_data.hpp"
#include "wprobe/errors.hpp"
#include <algorithm>
#include <atomic>

namespace wprobe
{
namespace
{
std::atomic<uint64_t> next_serial{1};
constexpr size_t initial_stack_slots = 4096;
}  // namespace

std::string_view to_string(ExecStatus status) noexcept
{
    switch (status)
    {
    case ExecStatus::ready:
        return "ready";
    case ExecStatus::paused:
        return "paused";
    case ExecStatus::running:
        return "running";
    case ExecStatus::returned:
        return "returned";
    case ExecStatus::trapped:
        return "trapped";
    case ExecStatus::aborted:
        return "aborted";
    }
    return "?";
}

Execution::Execution(Instance& instance, uint32_t func_index, std::vector<Value> args)
{
    Engine& engine = instance.engine();
    auto& data = engine.data();
    engine.check_context();
    if (data.active)
        throw Error("engine already has an active execution");
    const Module& m = instance.module();
    if (func_index >= m.num_funcs())
        throw Error("no function " + std::to_string(func_index));
    const FuncType& type = m.func_type(func_index);
    if (args.size() != type.params.size())
        throw ArgumentMismatch("expected " + std::to_string(type.params.size()) +
                               " arguments, got " + std::to_string(args.size()));
    for (size_t i = 0; i < args.size(); ++i)
        if (args[i].type != type.params[i])
            throw ArgumentMismatch("argument " + std::to_string(i) + " must be " +
                                   std::string(to_string(type.params[i])));

    state_ = std::make_shared<ExecState>();
    auto& s = *state_;
    s.self = state_;
    s.engine = &engine;
    s.data = &data;
    s.instance = &instance;
    s.owner = this;
    s.module_id = m.id;
    s.serial = next_serial.fetch_add(1, std::memory_order_relaxed);
    s.entry_func = func_index;
    s.result_types = type.results;

    if (const FuncDecl* f = m.func(func_index))
    {
        const size_t locals = f->local_types.size();
        s.stack.assign(std::max(initial_stack_slots, locals + f->sidetable.max_stack_height + 1), 0);
        for (size_t i = 0; i < args.size(); ++i)
            s.stack[i] = args[i].bits;
        s.sp = static_cast<uint32_t>(locals);
        s.frames.reserve(detail::max_frames + 1);
        auto& frame = s.frames.emplace_back();
        frame.func = f;
        frame.func_index = func_index;
        frame.frame_id = data.next_frame_id++;
        frame.probes =
            &data.modules.at(m.id)->funcs[func_index - m.num_imported_funcs()];
    }
    else
        s.host_args = std::move(args);
    data.active = this;
}

Execution::~Execution()
{
    if (!state_)
        return;
    if (!finished())
    {
        state_->status = ExecStatus::aborted;
        try
        {
            finish();
        }
        catch (...)
        {
        }
    }
    if (state_->data->active == this)
        state_->data->active = nullptr;
    state_->owner = nullptr;
}

void Execution::finish()
{
    auto& s = *state_;
    s.frames.clear();
    s.stepping = false;
    s.pause_requested = false;
    if (s.data->active == this)
        s.data->active = nullptr;
    const auto listeners = s.data->exit_listeners;
    for (const auto& [id, fn] : listeners)
        fn(*this);
}

ExecStatus Execution::run()
{
    auto& s = *state_;
    if (finished())
        return s.status;
    s.engine->check_context();
    auto& data = *s.data;
    if (data.stripped && (data.global || data.probed_locations != 0))
        throw Error("the stripped interpreter cannot run with probes installed");

    if (s.frames.empty())
    {
        s.status = ExecStatus::running;
        const auto& fn = s.instance->host_functions.at(s.entry_func);
        try
        {
            s.results = fn(*s.instance, s.host_args);
            s.status = ExecStatus::returned;
        }
        catch (const TrapError& e)
        {
            s.trap = Trap{e.trap().kind, CodeLocation{s.module_id, s.entry_func, 0}};
            s.status = ExecStatus::trapped;
        }
        finish();
        return s.status;
    }

    s.status = ExecStatus::running;
    data.owner = std::this_thread::get_id();
    data.running.store(true, std::memory_order_release);
    try
    {
        detail::interpret(s, data.stripped);
    }
    catch (...)
    {
        data.running.store(false, std::memory_order_release);
        s.status = ExecStatus::aborted;
        finish();
        throw;
    }
    data.running.store(false, std::memory_order_release);

    if (s.status == ExecStatus::returned)
    {
        for (size_t i = 0; i < s.result_types.size(); ++i)
            s.results.push_back(detail::read_slot(s.stack[i], s.result_types[i]));
    }
    if (finished())
        finish();
    return s.status;
}

StepOutcome Execution::step()
{
    auto& s = *state_;
    if (finished())
        throw Error("execution has finished");
    s.stepping = true;
    s.step_armed = s.skip_probes;
    ExecStatus status;
    try
    {
        status = run();
    }
    catch (...)
    {
        s.stepping = false;
        throw;
    }
    s.stepping = false;
    s.step_armed = false;
    switch (status)
    {
    case ExecStatus::returned:
        return StepOutcome::returned;
    case ExecStatus::trapped:
        return StepOutcome::trapped;
    default:
        return StepOutcome::continued;
    }
}

void Execution::request_pause(std::string reason)
{
    auto& s = *state_;
    if (!s.pause_requested)
        s.pause_reason = std::move(reason);
    s.pause_requested = true;
}

ExecStatus Execution::status() const noexcept
{
    return state_->status;
}

bool Execution::finished() const noexcept
{
    const auto st = state_->status;
    return st == ExecStatus::returned || st == ExecStatus::trapped || st == ExecStatus::aborted;
}

const std::string& Execution::pause_reason() const noexcept
{
    return state_->pause_reason;
}

CodeLocation Execution::location() const
{
    const auto& s = *state_;
    if (s.frames.empty())
        throw Error("execution has no frames");
    const auto& f = s.frames.back();
    return CodeLocation{s.module_id, f.func_index, f.pc};
}

uint32_t Execution::depth() const noexcept
{
    return static_cast<uint32_t>(state_->frames.size());
}

std::shared_ptr<FrameAccessor> Execution::frame(uint32_t level) const
{
    auto& s = *state_;
    if (level >= s.frames.size())
        throw IndexOutOfRange("frame level " + std::to_string(level));
    return detail::materialize_accessor(s, static_cast<uint32_t>(s.frames.size() - 1 - level));
}

const std::vector<Value>& Execution::results() const noexcept
{
    return state_->results;
}

const std::optional<Trap>& Execution::trap() const noexcept
{
    return state_->trap;
}

InvokeResult Execution::result() const
{
    return InvokeResult{state_->results, state_->trap};
}

uint64_t Execution::serial() const noexcept
{
    return state_->serial;
}

Instance& Execution::instance() const noexcept
{
    return *state_->instance;
}

uint32_t Execution::entry_function() const noexcept
{
    return state_->entry_func;
}

InvokeResult invoke(Instance& instance, std::string_view export_name, std::vector<Value> args,
    const PauseHandler& on_pause)
{
    const auto index = instance.module().find_export(export_name, ExternalKind::function);
    if (!index)
        throw NoSuchExport(std::string(export_name));
    Execution exec{instance, *index, std::move(args)};
    while (exec.run() == ExecStatus::paused)
    {
        if (on_pause)
            on_pause(exec);
    }
    return exec.result();
}

std::optional<uint32_t> find_entry_point(const Module& module) noexcept
{
    if (auto i = module.find_export("main", ExternalKind::function))
        return i;
    return module.find_export("_start", ExternalKind::function);
}
}  // namespace wprobe
