// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/probe_library.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/execution.hpp"
#include "wprobe/frame_accessor.hpp"
#include "wprobe/opcodes.hpp"
#include <algorithm>
#include <utility>
#include <vector>

namespace wprobe
{
namespace
{
void remove_quietly(Engine& engine, const CodeLocation& loc, const ProbePtr& p)
{
    try
    {
        engine.remove_probe(loc, p);
    }
    catch (const NotInstalled&)
    {
    }
}

/// Condition under which the branch at `pc` leaves the function body.
enum class ExitKind
{
    never,
    always,
    if_true,
    table,
};

ExitKind exit_kind(const FuncDecl& f, uint32_t pc)
{
    const auto& st = f.sidetable;
    auto leaves = [&](uint32_t slot) { return st.targets[slot].target_pc == BranchTarget::return_target; };
    switch (f.pristine_body[pc])
    {
    case op::return_:
        return ExitKind::always;
    case op::end:
        return pc + 1 == f.pristine_body.size() ? ExitKind::always : ExitKind::never;
    case op::br:
        return leaves(st.branch_index[pc]) ? ExitKind::always : ExitKind::never;
    case op::br_if:
        return leaves(st.branch_index[pc]) ? ExitKind::if_true : ExitKind::never;
    case op::br_table:
        return ExitKind::table;
    default:
        return ExitKind::never;
    }
}

uint32_t read_u32_leb(const std::vector<uint8_t>& b, uint32_t& p)
{
    uint32_t v = 0;
    for (unsigned shift = 0;; shift += 7)
    {
        const uint8_t byte = b[p++];
        v |= uint32_t(byte & 0x7f) << shift;
        if (!(byte & 0x80))
            return v;
    }
}
}  // namespace

struct EntryExitHooks::State
{
    Engine* engine;
    std::vector<std::pair<CodeLocation, ProbePtr>> installed;
    std::vector<uint64_t> shadow;
    size_t listener = 0;
    bool removed = false;
};

EntryExitHooks::EntryExitHooks(std::shared_ptr<State> state) noexcept : state_{std::move(state)} {}

EntryExitHooks::~EntryExitHooks()
{
    remove();
}

void EntryExitHooks::remove()
{
    if (!state_ || state_->removed)
        return;
    state_->removed = true;
    for (const auto& [loc, p] : state_->installed)
        remove_quietly(*state_->engine, loc, p);
    state_->engine->remove_exit_listener(state_->listener);
}

std::unique_ptr<EntryExitHooks> instrument_entry_exit(Engine& engine, const Module& module,
    uint32_t func_index, FrameCallback on_entry, FrameCallback on_exit)
{
    const FuncDecl* f = module.func(func_index);
    if (!f)
        throw InvalidLocation(CodeLocation{module.id, func_index, 0});
    auto state = std::make_shared<EntryExitHooks::State>();
    state->engine = &engine;
    std::weak_ptr<EntryExitHooks::State> weak = state;

    auto exit = [weak, on_exit](ProbeContext& ctx) {
        auto s = weak.lock();
        if (!s)
            return;
        const uint64_t id = ctx.frame()->frame_id();
        while (!s->shadow.empty() && s->shadow.back() != id)
            s->shadow.pop_back();
        if (s->shadow.empty())
            return;
        s->shadow.pop_back();
        on_exit(ctx);
    };

    auto entry = make_probe([weak, on_entry](ProbeContext& ctx) {
        auto s = weak.lock();
        if (!s)
            return;
        const uint64_t id = ctx.frame()->frame_id();
        if (!s->shadow.empty() && s->shadow.back() == id)
            return;
        s->shadow.push_back(id);
        on_entry(ctx);
    });
    const CodeLocation first{module.id, func_index, 0};
    engine.insert_probe(first, entry);
    state->installed.emplace_back(first, entry);

    const auto& body = f->pristine_body;
    for (uint32_t pc = 0; pc < body.size(); ++pc)
    {
        if (!f->sidetable.is_boundary(pc))
            continue;
        ProbePtr probe;
        switch (exit_kind(*f, pc))
        {
        case ExitKind::never:
            continue;
        case ExitKind::always:
            probe = make_probe(exit);
            break;
        case ExitKind::if_true:
            probe = make_probe([exit](ProbeContext& ctx) {
                if (ctx.frame()->get_operand(0).as_u32() != 0)
                    exit(ctx);
            });
            break;
        case ExitKind::table:
        {
            uint32_t p = pc + 1;
            const uint32_t n = read_u32_leb(body, p);
            const uint32_t base = f->sidetable.branch_index[pc];
            std::vector<bool> leaves(n + 1);
            bool any = false;
            for (uint32_t i = 0; i <= n; ++i)
            {
                leaves[i] = f->sidetable.targets[base + i].target_pc == BranchTarget::return_target;
                any = any || leaves[i];
            }
            if (!any)
                continue;
            probe = make_probe([exit, leaves, n](ProbeContext& ctx) {
                const uint32_t i = std::min(ctx.frame()->get_operand(0).as_u32(), n);
                if (leaves[i])
                    exit(ctx);
            });
            break;
        }
        }
        const CodeLocation loc{module.id, func_index, pc};
        engine.insert_probe(loc, probe);
        state->installed.emplace_back(loc, probe);
    }

    state->listener = engine.add_exit_listener([weak](Execution&) {
        if (auto s = weak.lock())
            s->shadow.clear();
    });
    return std::make_unique<EntryExitHooks>(std::move(state));
}

struct AfterInstructionHook::State
{
    Engine* engine;
    CodeLocation loc;
    ProbePtr local;
    std::vector<ProbePtr> pending;
    size_t listener = 0;
    bool removed = false;

    void drop_pending()
    {
        for (const auto& g : pending)
        {
            try
            {
                engine->remove_global_probe(g);
            }
            catch (const NotInstalled&)
            {
            }
        }
        pending.clear();
    }
};

AfterInstructionHook::AfterInstructionHook(std::shared_ptr<State> state) noexcept : state_{std::move(state)} {}

AfterInstructionHook::~AfterInstructionHook()
{
    remove();
}

void AfterInstructionHook::remove()
{
    if (!state_ || state_->removed)
        return;
    state_->removed = true;
    remove_quietly(*state_->engine, state_->loc, state_->local);
    state_->drop_pending();
    state_->engine->remove_exit_listener(state_->listener);
}

namespace
{
/// Global probe that fires its target once and then uninstalls itself.
class OneShot final : public Probe
{
public:
    OneShot(std::weak_ptr<AfterInstructionHook::State> owner, ProbePtr target, uint64_t serial)
      : owner_{std::move(owner)}, target_{std::move(target)}, serial_{serial}
    {
    }

    std::weak_ptr<OneShot> self;

    void fire(ProbeContext& ctx) override
    {
        auto keep = self.lock();
        ctx.engine().remove_global_probe(keep);
        if (auto s = owner_.lock())
            std::erase(s->pending, keep);
        if (ctx.execution().serial() == serial_)
            target_->fire(ctx);
    }

private:
    std::weak_ptr<AfterInstructionHook::State> owner_;
    ProbePtr target_;
    uint64_t serial_;
};
}  // namespace

std::unique_ptr<AfterInstructionHook> after_instruction(Engine& engine, const CodeLocation& loc, ProbePtr probe)
{
    auto state = std::make_shared<AfterInstructionHook::State>();
    state->engine = &engine;
    state->loc = loc;
    std::weak_ptr<AfterInstructionHook::State> weak = state;
    state->local = make_probe([weak, probe](ProbeContext& ctx) {
        auto s = weak.lock();
        if (!s)
            return;
        auto g = std::make_shared<OneShot>(weak, probe, ctx.execution().serial());
        g->self = g;
        s->pending.push_back(g);
        ctx.engine().insert_global_probe(g);
    });
    engine.insert_probe(loc, state->local);
    state->listener = engine.add_exit_listener([weak](Execution&) {
        if (auto s = weak.lock())
            s->drop_pending();
    });
    return std::make_unique<AfterInstructionHook>(std::move(state));
}
}  // namespace wprobe
