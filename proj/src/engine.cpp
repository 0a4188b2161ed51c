// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "engine_data.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/opcodes.hpp"
#include "wprobe/validator.hpp"
#include <algorithm>
#include <chrono>
#include <ostream>

namespace wprobe
{
namespace detail
{
SeqRef seq_with(const SeqRef& seq, ProbePtr p)
{
    auto* next = new ProbeSeq;
    if (seq)
        next->probes = seq->probes;
    next->probes.push_back(std::move(p));
    if (next->probes.size() == 1 && next->probes[0]->kind() == ProbeKind::counter)
        next->single_counter = static_cast<CountProbe*>(next->probes[0].get());
    return SeqRef{next};
}

SeqRef seq_without(const SeqRef& seq, const Probe* p)
{
    if (!seq || seq->probes.size() <= 1)
        return SeqRef{};
    auto* next = new ProbeSeq;
    for (const auto& q : seq->probes)
        if (q.get() != p)
            next->probes.push_back(q);
    if (next->probes.size() == 1 && next->probes[0]->kind() == ProbeKind::counter)
        next->single_counter = static_cast<CountProbe*>(next->probes[0].get());
    return SeqRef{next};
}

namespace
{
bool contains(const SeqRef& seq, const Probe* p) noexcept
{
    if (!seq)
        return false;
    return std::any_of(seq->probes.begin(), seq->probes.end(),
        [p](const ProbePtr& q) { return q.get() == p; });
}

void fire_one(ExecState& state, Probe& p, ProbeContext& ctx)
{
    switch (p.kind())
    {
    case ProbeKind::counter:
        static_cast<CountProbe&>(p).increment();
        break;
    case ProbeKind::operand_tos:
    {
        const Frame& f = state.frames.back();
        const auto type = f.func->sidetable.operand_type(ctx.location().pc, 0);
        if (type)
            static_cast<OperandProbe&>(p).fire_tos(
                ctx.location(), read_slot(state.stack[state.sp - 1], *type));
        break;
    }
    case ProbeKind::generic:
        p.fire(ctx);
        break;
    }
}
}  // namespace

void fire_probes(ExecState& state, const ProbeSeq& seq, const CodeLocation& loc)
{
    const SeqRef snapshot{const_cast<ProbeSeq*>(&seq)};
    if (state.data->empty_probes)
    {
        for (const auto& p : snapshot->probes)
        {
            const Probe* volatile sink = p.get();
            (void)sink;
        }
        return;
    }
    ProbeContext ctx{state, loc};
    try
    {
        for (const auto& p : snapshot->probes)
            fire_one(state, *p, ctx);
    }
    catch (const MonitorError&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        throw MonitorError(loc, e.what());
    }
    catch (...)
    {
        throw MonitorError(loc, "unknown exception");
    }
}

std::shared_ptr<FrameAccessor> materialize_accessor(ExecState& state, uint32_t index)
{
    Frame& f = state.frames.at(index);
    if (!f.accessor)
        f.accessor = std::make_shared<FrameAccessor>(state.self, index, f.frame_id);
    return f.accessor;
}
}  // namespace detail

using detail::EngineData;
using detail::ModuleEntry;
using detail::SeqRef;

std::shared_ptr<FrameAccessor> ProbeContext::frame() const
{
    return detail::materialize_accessor(state_, static_cast<uint32_t>(state_.frames.size() - 1));
}

void OperandProbe::fire(ProbeContext& ctx)
{
    const auto frame = ctx.frame();
    if (frame->num_operands() != 0)
        fire_tos(ctx.location(), frame->get_operand(0));
}

Execution& ProbeContext::execution() const noexcept
{
    return *state_.owner;
}

Engine& ProbeContext::engine() const noexcept
{
    return *state_.engine;
}

std::string_view to_string(DispatchMode mode) noexcept
{
    return mode == DispatchMode::normal ? "NORMAL" : "GLOBAL_PROBE";
}

Engine::Engine() : data_{std::make_unique<EngineData>()} {}

Engine::~Engine() = default;

Module& Engine::load(Module module)
{
    check_context();
    if (!module.validated)
        validate_or_throw(module);
    auto entry = std::make_unique<ModuleEntry>();
    entry->funcs.resize(module.funcs.size());
    entry->module = std::make_unique<Module>(std::move(module));
    Module& m = *entry->module;
    data_->modules[m.id] = std::move(entry);
    return m;
}

Module* Engine::find_module(uint32_t module_id) noexcept
{
    const auto it = data_->modules.find(module_id);
    return it == data_->modules.end() ? nullptr : it->second->module.get();
}

namespace
{
struct ResolvedLocation
{
    ModuleEntry* entry;
    FuncDecl* func;
    detail::FuncProbes* probes;
};

ResolvedLocation resolve(EngineData& data, const CodeLocation& loc)
{
    const auto it = data.modules.find(loc.module_id);
    if (it == data.modules.end())
        throw InvalidLocation(loc);
    auto& entry = *it->second;
    FuncDecl* f = entry.module->func(loc.func_index);
    if (!f || !f->sidetable.is_boundary(loc.pc))
        throw InvalidLocation(loc);
    return {&entry, f, &entry.funcs[loc.func_index - entry.module->num_imported_funcs()]};
}
}  // namespace

void Engine::check_context() const
{
    if (data_->running.load(std::memory_order_acquire) &&
        std::this_thread::get_id() != data_->owner)
        throw WrongContext();
}

void Engine::insert_probe(const CodeLocation& loc, ProbePtr probe)
{
    check_context();
    if (!probe)
        throw Error("null probe");
    const auto r = resolve(*data_, loc);
    auto& slots = r.probes->at;
    if (slots.empty())
        slots.resize(r.func->body.size());
    auto& slot = slots[loc.pc];
    if (detail::contains(slot, probe.get()))
        throw DuplicateInsert("probe already installed at " + to_string(loc));
    const bool was_empty = !slot;
    slot = detail::seq_with(slot, std::move(probe));
    if (was_empty)
    {
        r.func->body[loc.pc] = op::probe;
        ++data_->probed_locations;
    }
}

void Engine::remove_probe(const CodeLocation& loc, const ProbePtr& probe)
{
    check_context();
    const auto r = resolve(*data_, loc);
    auto& slots = r.probes->at;
    if (slots.empty() || !detail::contains(slots[loc.pc], probe.get()))
        throw NotInstalled("probe not installed at " + to_string(loc));
    auto& slot = slots[loc.pc];
    slot = detail::seq_without(slot, probe.get());
    if (!slot)
    {
        r.func->body[loc.pc] = r.func->pristine_body[loc.pc];
        --data_->probed_locations;
    }
}

std::vector<ProbePtr> Engine::probes_at(const CodeLocation& loc) const
{
    const auto r = resolve(*data_, loc);
    if (r.probes->at.empty() || !r.probes->at[loc.pc])
        return {};
    return r.probes->at[loc.pc]->probes;
}

size_t Engine::probed_location_count() const noexcept
{
    return data_->probed_locations;
}

void Engine::insert_global_probe(ProbePtr probe)
{
    check_context();
    if (!probe)
        throw Error("null probe");
    if (detail::contains(data_->global, probe.get()))
        throw DuplicateInsert("global probe already installed");
    const bool was_empty = !data_->global;
    data_->global = detail::seq_with(data_->global, std::move(probe));
    if (was_empty)
        set_dispatch_mode(DispatchMode::global_probe);
}

void Engine::remove_global_probe(const ProbePtr& probe)
{
    check_context();
    if (!detail::contains(data_->global, probe.get()))
        throw NotInstalled("global probe not installed");
    data_->global = detail::seq_without(data_->global, probe.get());
    if (!data_->global)
        set_dispatch_mode(DispatchMode::normal);
}

std::vector<ProbePtr> Engine::global_probes() const
{
    return data_->global ? data_->global->probes : std::vector<ProbePtr>{};
}

DispatchMode Engine::dispatch_mode() const noexcept
{
    return data_->mode;
}

void Engine::set_dispatch_mode(DispatchMode mode) noexcept
{
    data_->mode = mode;
}

uint8_t Engine::original_opcode(const CodeLocation& loc) const
{
    return resolve(*data_, loc).func->pristine_body[loc.pc];
}

bool Engine::is_instruction_boundary(const CodeLocation& loc) const noexcept
{
    try
    {
        resolve(*data_, loc);
        return true;
    }
    catch (const InvalidLocation&)
    {
        return false;
    }
}

void Engine::set_empty_probes(bool enabled) noexcept
{
    data_->empty_probes = enabled;
}

bool Engine::empty_probes() const noexcept
{
    return data_->empty_probes;
}

void Engine::set_stripped_interpreter(bool enabled) noexcept
{
    data_->stripped = enabled;
}

bool Engine::stripped_interpreter() const noexcept
{
    return data_->stripped;
}

size_t Engine::add_exit_listener(std::function<void(Execution&)> listener)
{
    const auto id = data_->next_listener++;
    data_->exit_listeners.emplace(id, std::move(listener));
    return id;
}

void Engine::remove_exit_listener(size_t id)
{
    data_->exit_listeners.erase(id);
}

Execution* Engine::current_execution() const noexcept
{
    return data_->active;
}

std::unique_ptr<Instance> Engine::instantiate(
    Module& module, const HostImports& imports, const std::function<void(Execution&)>& on_pause)
{
    check_context();
    if (find_module(module.id) != &module)
        throw LinkError("module was not loaded into this engine");

    auto inst = std::make_unique<Instance>(*this, module);
    for (const auto& imp : module.imports)
    {
        const auto it = std::find_if(imports.begin(), imports.end(),
            [&](const HostImport& h) { return h.module == imp.module && h.name == imp.name; });
        if (it == imports.end())
            throw LinkError("missing import " + imp.module + "." + imp.name);
        if (it->type != module.types[imp.type_index])
            throw LinkError("signature mismatch for import " + imp.module + "." + imp.name);
        inst->host_functions.push_back(it->function);
    }

    if (!module.memories.empty())
    {
        const auto& limits = module.memories[0];
        inst->memory.assign(size_t{limits.min} * page_size, 0);
        inst->memory_max_pages = limits.max.value_or(max_pages);
    }
    if (!module.tables.empty())
        inst->table.assign(module.tables[0].min, null_element);
    for (const auto& g : module.globals)
        inst->globals.push_back(g.init.bits);

    for (const auto& seg : module.elements)
        if (uint64_t{seg.offset} + seg.funcs.size() > inst->table.size())
            throw LinkError("element segment does not fit in table");
    for (const auto& seg : module.data)
        if (uint64_t{seg.offset} + seg.bytes.size() > inst->memory.size())
            throw LinkError("data segment does not fit in memory");
    for (const auto& seg : module.elements)
        std::copy(seg.funcs.begin(), seg.funcs.end(), inst->table.begin() + seg.offset);
    for (const auto& seg : module.data)
        std::copy(seg.bytes.begin(), seg.bytes.end(), inst->memory.begin() + seg.offset);

    if (module.start)
    {
        Execution exec{*inst, *module.start, {}};
        while (exec.run() == ExecStatus::paused)
        {
            if (on_pause)
                on_pause(exec);
        }
        if (exec.trap())
            throw TrapError(*exec.trap());
    }
    return inst;
}

HostImports builtin_imports(std::ostream& out)
{
    HostImports imports;
    imports.push_back({"env", "print_i32", FuncType{{ValueType::i32}, {}},
        [&out](Instance&, std::span<const Value> args) {
            out << args[0].as_i32();
            return std::vector<Value>{};
        }});
    imports.push_back({"env", "print_ln", FuncType{{}, {}}, [&out](Instance&, std::span<const Value>) {
                           out << '\n';
                           return std::vector<Value>{};
                       }});
    imports.push_back({"env", "now_us", FuncType{{}, {ValueType::i64}},
        [](Instance&, std::span<const Value>) {
            const auto t = std::chrono::steady_clock::now().time_since_epoch();
            return std::vector<Value>{
                Value::i64(std::chrono::duration_cast<std::chrono::microseconds>(t).count())};
        }});
    return imports;
}

Value Instance::global(uint32_t index) const
{
    if (index >= globals.size())
        throw IndexOutOfRange("global " + std::to_string(index));
    return detail::read_slot(globals[index], module_.globals[index].type);
}

void Instance::set_global(uint32_t index, Value v)
{
    if (index >= globals.size())
        throw IndexOutOfRange("global " + std::to_string(index));
    if (v.type != module_.globals[index].type)
        throw TypeMismatch("global " + std::to_string(index) + " has type " +
                           std::string(to_string(module_.globals[index].type)));
    globals[index] = v.bits;
}

std::vector<Value> Instance::global_values() const
{
    std::vector<Value> out;
    for (uint32_t i = 0; i < globals.size(); ++i)
        out.push_back(global(i));
    return out;
}
}  // namespace wprobe
