// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "module.hpp"
#include "types.hpp"
#include <cstdint>
#include <memory>

namespace wprobe
{
struct ExecState;

/// View of one live interpreter frame. At most one accessor exists per frame;
/// it stays the same object for the whole frame lifetime and turns stale
/// once the frame is popped. Every method except valid() and frame_id()
/// throws StaleAccessor on a stale accessor.
class FrameAccessor
{
public:
    FrameAccessor(std::weak_ptr<ExecState> state, uint32_t stack_index, uint64_t frame_id) noexcept;
    ~FrameAccessor();
    FrameAccessor(const FrameAccessor&) = delete;
    FrameAccessor& operator=(const FrameAccessor&) = delete;

    bool valid() const noexcept;
    uint64_t frame_id() const noexcept { return frame_id_; }

    const FuncDecl& func() const;
    uint32_t func_index() const;
    /// Current instruction: the probed one for the innermost frame, the
    /// call instruction for callers.
    uint32_t pc() const;
    CodeLocation location() const;
    /// 1 for the entry frame.
    uint32_t depth() const;
    /// nullptr for the entry frame.
    std::shared_ptr<FrameAccessor> caller() const;

    uint32_t num_locals() const;
    Value get_local(uint32_t index) const;
    void set_local(uint32_t index, Value v);

    uint32_t num_operands() const;
    /// k = 0 is the top of the stack.
    Value get_operand(uint32_t k) const;
    void set_operand(uint32_t k, Value v);

    /// Total accessors ever constructed in this process.
    static uint64_t allocation_count() noexcept;

private:
    struct Resolved;
    Resolved resolve() const;

    std::weak_ptr<ExecState> state_;
    uint32_t stack_index_;
    uint64_t frame_id_;
};
}  // namespace wprobe
