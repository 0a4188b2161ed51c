// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "types.hpp"
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>

namespace wprobe
{
class Engine;
class Execution;
class FrameAccessor;
struct ExecState;

enum class ProbeKind : uint8_t
{
    generic,
    counter,
    operand_tos,
};

/// Handed to a firing probe. Valid only for the duration of the call; the
/// FrameAccessor obtained from it may be kept.
class ProbeContext
{
public:
    ProbeContext(ExecState& state, const CodeLocation& loc) noexcept : state_{state}, loc_{loc} {}
    ProbeContext(const ProbeContext&) = delete;
    ProbeContext& operator=(const ProbeContext&) = delete;

    const CodeLocation& location() const noexcept { return loc_; }

    /// Accessor for the frame the probe fires in, created on first request.
    std::shared_ptr<FrameAccessor> frame() const;

    Execution& execution() const noexcept;
    Engine& engine() const noexcept;

private:
    ExecState& state_;
    const CodeLocation& loc_;
};

class Probe
{
public:
    virtual ~Probe() = default;

    ProbeKind kind() const noexcept { return kind_; }

    /// Entry point for generic probes.
    virtual void fire(ProbeContext& ctx) { (void)ctx; }

protected:
    explicit Probe(ProbeKind kind = ProbeKind::generic) noexcept : kind_{kind} {}

private:
    ProbeKind kind_;
};

using ProbePtr = std::shared_ptr<Probe>;

/// Counts its firings. The interpreter increments it directly without a
/// virtual call or accessor when it is the only probe at a location.
class CountProbe final : public Probe
{
public:
    CountProbe() noexcept : Probe{ProbeKind::counter} {}

    void fire(ProbeContext&) override { increment(); }

    void increment() noexcept
    {
        if (count != std::numeric_limits<uint64_t>::max())
            ++count;
    }

    uint64_t count = 0;
};

/// Receives the value on top of the operand stack.
class OperandProbe : public Probe
{
public:
    OperandProbe() noexcept : Probe{ProbeKind::operand_tos} {}

    virtual void fire_tos(const CodeLocation& loc, Value top) = 0;

    /// Used when the probe is fired generically (for example by a library
    /// helper); reads the top operand through the frame accessor.
    void fire(ProbeContext& ctx) override;
};

/// Generic probe running a callable.
class FunctionProbe final : public Probe
{
public:
    using Callback = std::function<void(ProbeContext&)>;

    explicit FunctionProbe(Callback cb) : callback_{std::move(cb)} {}

    void fire(ProbeContext& ctx) override { callback_(ctx); }

private:
    Callback callback_;
};

inline std::shared_ptr<FunctionProbe> make_probe(FunctionProbe::Callback cb)
{
    return std::make_shared<FunctionProbe>(std::move(cb));
}

/// OperandProbe running a callable.
class FunctionOperandProbe final : public OperandProbe
{
public:
    using Callback = std::function<void(const CodeLocation&, Value)>;

    explicit FunctionOperandProbe(Callback cb) : callback_{std::move(cb)} {}

    void fire_tos(const CodeLocation& loc, Value top) override { callback_(loc, top); }

private:
    Callback callback_;
};
}  // namespace wprobe
