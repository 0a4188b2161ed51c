// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "module.hpp"
#include "probe.hpp"
#include "types.hpp"
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wprobe
{
class Instance;
class Execution;

namespace detail
{
struct EngineData;
}

/// Interpreter dispatch table selector.
enum class DispatchMode : uint8_t
{
    normal,
    global_probe,
};

std::string_view to_string(DispatchMode mode) noexcept;

using HostFunction = std::function<std::vector<Value>(Instance&, std::span<const Value>)>;

struct HostImport
{
    std::string module;
    std::string name;
    FuncType type;
    HostFunction function;
};

using HostImports = std::vector<HostImport>;

/// The "env" imports available to every program: print_i32(i32),
/// print_ln(), and now_us() -> i64 (monotonic microseconds).
HostImports builtin_imports(std::ostream& out);

/// Owns loaded modules and all instrumentation state. An engine runs at most
/// one execution at a time, on one thread. While that execution is running,
/// the probe API may be used only from that thread (WrongContext otherwise);
/// while it is paused or idle any thread may use it.
class Engine
{
public:
    Engine();
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Validates (if needed) and takes ownership of a module. The returned
    /// reference lives as long as the engine.
    Module& load(Module module);
    Module* find_module(uint32_t module_id) noexcept;

    /// Links, initializes memory/table/globals and runs the start function.
    /// Throws LinkError, or TrapError when the start function traps. Pauses
    /// during the start function are passed to `on_pause`, then resumed.
    std::unique_ptr<Instance> instantiate(Module& module, const HostImports& imports = {},
        const std::function<void(Execution&)>& on_pause = {});

    /// Local probes.
    void insert_probe(const CodeLocation& loc, ProbePtr probe);
    void remove_probe(const CodeLocation& loc, const ProbePtr& probe);
    std::vector<ProbePtr> probes_at(const CodeLocation& loc) const;
    /// Number of locations currently holding at least one local probe.
    size_t probed_location_count() const noexcept;

    /// Global probes, fired before every instruction.
    void insert_global_probe(ProbePtr probe);
    void remove_global_probe(const ProbePtr& probe);
    std::vector<ProbePtr> global_probes() const;

    DispatchMode dispatch_mode() const noexcept;
    /// Selects the table used for subsequent dispatches. insert/remove of
    /// global probes call this on 0->1 and 1->0 transitions.
    void set_dispatch_mode(DispatchMode mode) noexcept;

    /// The opcode byte of the instruction at `loc` as decoded, whether or not
    /// a probe has overwritten it. Throws InvalidLocation.
    uint8_t original_opcode(const CodeLocation& loc) const;
    bool is_instruction_boundary(const CodeLocation& loc) const noexcept;

    /// When set, probe lists are dispatched but no probe code runs. Used to
    /// separate dispatch cost from monitor cost.
    void set_empty_probes(bool enabled) noexcept;
    bool empty_probes() const noexcept;

    /// When set, executions use the interpreter variant compiled without any
    /// probe support. Starting an execution in this mode with probes
    /// installed throws Error.
    void set_stripped_interpreter(bool enabled) noexcept;
    bool stripped_interpreter() const noexcept;

    /// Called after every execution finishes (returned, trapped or aborted).
    size_t add_exit_listener(std::function<void(Execution&)> listener);
    void remove_exit_listener(size_t id);

    /// The execution that is currently running or paused, if any.
    Execution* current_execution() const noexcept;

    /// Throws WrongContext when called from a thread other than the one
    /// running the current execution.
    void check_context() const;

    detail::EngineData& data() noexcept { return *data_; }

private:
    std::unique_ptr<detail::EngineData> data_;
};
}  // namespace wprobe
