// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wprobe/engine.hpp"
#include "wprobe/execution.hpp"
#include "wprobe/frame_accessor.hpp"
#include "wprobe/instance.hpp"
#include "wprobe/probe.hpp"
#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace wprobe::detail
{
/// Immutable probe list. Firing holds a reference to the sequence it
/// started with, so concurrent edits build a new sequence instead.
struct ProbeSeq
{
    uint32_t refs = 0;
    std::vector<ProbePtr> probes;
    /// Set when the list is exactly one CountProbe.
    CountProbe* single_counter = nullptr;
};

/// Non-atomic intrusive reference to a ProbeSeq.
class SeqRef
{
public:
    SeqRef() noexcept = default;
    explicit SeqRef(ProbeSeq* p) noexcept : p_{p}
    {
        if (p_)
            ++p_->refs;
    }
    SeqRef(const SeqRef& o) noexcept : SeqRef{o.p_} {}
    SeqRef(SeqRef&& o) noexcept : p_{o.p_} { o.p_ = nullptr; }
    SeqRef& operator=(SeqRef o) noexcept
    {
        std::swap(p_, o.p_);
        return *this;
    }
    ~SeqRef()
    {
        if (p_ && --p_->refs == 0)
            delete p_;
    }

    ProbeSeq* get() const noexcept { return p_; }
    ProbeSeq* operator->() const noexcept { return p_; }
    explicit operator bool() const noexcept { return p_ != nullptr; }

private:
    ProbeSeq* p_ = nullptr;
};

/// Returns `seq` with `p` appended (or removed); null for an empty result.
SeqRef seq_with(const SeqRef& seq, ProbePtr p);
SeqRef seq_without(const SeqRef& seq, const Probe* p);

/// Local probe lists of one function, indexed by pc; empty until the first
/// insertion.
struct FuncProbes
{
    std::vector<SeqRef> at;
};

struct ModuleEntry
{
    std::unique_ptr<Module> module;
    /// Indexed by defined-function index.
    std::vector<FuncProbes> funcs;
};

struct EngineData
{
    std::unordered_map<uint32_t, std::unique_ptr<ModuleEntry>> modules;
    SeqRef global;
    DispatchMode mode = DispatchMode::normal;
    size_t probed_locations = 0;
    bool empty_probes = false;
    bool stripped = false;

    Execution* active = nullptr;
    std::atomic<bool> running{false};
    std::thread::id owner;

    uint64_t next_frame_id = 1;

    std::map<size_t, std::function<void(Execution&)>> exit_listeners;
    size_t next_listener = 1;
};

inline constexpr uint32_t max_frames = 10000;

struct Frame
{
    const FuncDecl* func = nullptr;
    FuncProbes* probes = nullptr;
    uint32_t func_index = 0;
    /// Current instruction; for callers, the call instruction.
    uint32_t pc = 0;
    /// Where execution continues when the callee returns.
    uint32_t ret_pc = 0;
    /// Value-stack index of local 0; operands start after the locals.
    uint32_t locals_base = 0;
    uint64_t frame_id = 0;
    std::shared_ptr<FrameAccessor> accessor;
};

}  // namespace wprobe::detail

namespace wprobe
{
struct ExecState
{
    Engine* engine = nullptr;
    detail::EngineData* data = nullptr;
    Instance* instance = nullptr;
    Execution* owner = nullptr;
    uint32_t module_id = 0;
    uint64_t serial = 0;
    uint32_t entry_func = 0;
    std::vector<ValueType> result_types;
    std::vector<Value> host_args;

    std::vector<uint64_t> stack;
    /// Index one past the top operand while suspended.
    uint32_t sp = 0;
    std::vector<detail::Frame> frames;

    ExecStatus status = ExecStatus::ready;
    bool pause_requested = false;
    std::string pause_reason;
    /// Resume at the current boundary without firing its probes again.
    bool skip_probes = false;
    bool stepping = false;
    bool step_armed = false;

    std::vector<Value> results;
    std::optional<Trap> trap;

    std::weak_ptr<ExecState> self;

    const Module& module() const noexcept { return instance->module(); }
};
}  // namespace wprobe

namespace wprobe::detail
{

/// Runs `state` until it finishes or pauses. Throws MonitorError.
void interpret(ExecState& state, bool stripped);

/// Fires a probe list at the top frame of `state`, converting probe
/// exceptions into MonitorError.
void fire_probes(ExecState& state, const ProbeSeq& seq, const CodeLocation& loc);

/// Accessor for frames[index], created on first use.
std::shared_ptr<FrameAccessor> materialize_accessor(ExecState& state, uint32_t index);

Value read_slot(uint64_t bits, ValueType type) noexcept;
}  // namespace wprobe::detail
