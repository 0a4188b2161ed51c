// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "engine_data.hpp"
#include "wprobe/errors.hpp"
#include <atomic>

namespace wprobe
{
namespace
{
std::atomic<uint64_t> accessor_allocations{0};
}

struct FrameAccessor::Resolved
{
    std::shared_ptr<ExecState> hold;
    detail::Frame* frame;

    ExecState& state() const noexcept { return *hold; }
    bool innermost() const noexcept { return frame == &hold->frames.back(); }

    uint32_t operand_base() const noexcept
    {
        return frame->locals_base + static_cast<uint32_t>(frame->func->local_types.size());
    }

    /// Index one past this frame's top operand.
    uint32_t operand_top() const noexcept
    {
        if (innermost())
            return hold->sp;
        return (frame + 1)->locals_base;
    }

    uint32_t num_operands() const noexcept { return operand_top() - operand_base(); }

    ValueType operand_type(uint32_t k) const
    {
        const auto& st = frame->func->sidetable;
        const auto height = st.stack_height(frame->pc).value_or(0);
        const auto type = st.operand_type(frame->pc, k + (height - num_operands()));
        if (!type)
            throw IndexOutOfRange("no static type for operand " + std::to_string(k));
        return *type;
    }
};

FrameAccessor::FrameAccessor(std::weak_ptr<ExecState> state, uint32_t stack_index, uint64_t frame_id) noexcept
  : state_{std::move(state)}, stack_index_{stack_index}, frame_id_{frame_id}
{
    accessor_allocations.fetch_add(1, std::memory_order_relaxed);
}

FrameAccessor::~FrameAccessor() = default;

uint64_t FrameAccessor::allocation_count() noexcept
{
    return accessor_allocations.load(std::memory_order_relaxed);
}

bool FrameAccessor::valid() const noexcept
{
    const auto s = state_.lock();
    if (!s || stack_index_ >= s->frames.size())
        return false;
    const auto& f = s->frames[stack_index_];
    return f.frame_id == frame_id_ && f.accessor.get() == this;
}

FrameAccessor::Resolved FrameAccessor::resolve() const
{
    auto s = state_.lock();
    if (!s || stack_index_ >= s->frames.size())
        throw StaleAccessor();
    auto& f = s->frames[stack_index_];
    if (f.frame_id != frame_id_ || f.accessor.get() != this)
        throw StaleAccessor();
    s->engine->check_context();
    return Resolved{std::move(s), &f};
}

const FuncDecl& FrameAccessor::func() const
{
    return *resolve().frame->func;
}

uint32_t FrameAccessor::func_index() const
{
    return resolve().frame->func_index;
}

uint32_t FrameAccessor::pc() const
{
    return resolve().frame->pc;
}

CodeLocation FrameAccessor::location() const
{
    const auto r = resolve();
    return CodeLocation{r.state().module_id, r.frame->func_index, r.frame->pc};
}

uint32_t FrameAccessor::depth() const
{
    resolve();
    return stack_index_ + 1;
}

std::shared_ptr<FrameAccessor> FrameAccessor::caller() const
{
    const auto r = resolve();
    if (stack_index_ == 0)
        return nullptr;
    return detail::materialize_accessor(r.state(), stack_index_ - 1);
}

uint32_t FrameAccessor::num_locals() const
{
    return static_cast<uint32_t>(resolve().frame->func->local_types.size());
}

Value FrameAccessor::get_local(uint32_t index) const
{
    const auto r = resolve();
    const auto& types = r.frame->func->local_types;
    if (index >= types.size())
        throw IndexOutOfRange("local " + std::to_string(index) + " of " + std::to_string(types.size()));
    return detail::read_slot(r.state().stack[r.frame->locals_base + index], types[index]);
}

void FrameAccessor::set_local(uint32_t index, Value v)
{
    const auto r = resolve();
    const auto& types = r.frame->func->local_types;
    if (index >= types.size())
        throw IndexOutOfRange("local " + std::to_string(index) + " of " + std::to_string(types.size()));
    if (v.type != types[index])
        throw TypeMismatch("local " + std::to_string(index) + " has type " +
                           std::string(to_string(types[index])));
    r.state().stack[r.frame->locals_base + index] = v.bits;
}

uint32_t FrameAccessor::num_operands() const
{
    return resolve().num_operands();
}

Value FrameAccessor::get_operand(uint32_t k) const
{
    const auto r = resolve();
    const auto n = r.num_operands();
    if (k >= n)
        throw IndexOutOfRange("operand " + std::to_string(k) + " of " + std::to_string(n));
    return detail::read_slot(r.state().stack[r.operand_top() - 1 - k], r.operand_type(k));
}

void FrameAccessor::set_operand(uint32_t k, Value v)
{
    const auto r = resolve();
    const auto n = r.num_operands();
    if (k >= n)
        throw IndexOutOfRange("operand " + std::to_string(k) + " of " + std::to_string(n));
    const auto type = r.operand_type(k);
    if (v.type != type)
        throw TypeMismatch("operand " + std::to_string(k) + " has type " + std::string(to_string(type)));
    r.state().stack[r.operand_top() - 1 - k] = v.bits;
}
}  // namespace wprobe
