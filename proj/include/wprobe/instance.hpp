// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "engine.hpp"
#include "module.hpp"
#include <cstdint>
#include <vector>

namespace wprobe
{
inline constexpr uint32_t page_size = 65536;
inline constexpr uint32_t max_pages = 65536;
inline constexpr uint32_t null_element = UINT32_MAX;

/// Runtime state of one instantiated module.
class Instance
{
public:
    Instance(Engine& engine, Module& module) noexcept : engine_{engine}, module_{module} {}

    Engine& engine() const noexcept { return engine_; }
    Module& module() const noexcept { return module_; }

    Value global(uint32_t index) const;
    void set_global(uint32_t index, Value v);
    std::vector<Value> global_values() const;

    /// Linear memory (empty when the module declares none).
    std::vector<uint8_t> memory;
    uint32_t memory_max_pages = max_pages;
    /// Global cells as raw bits; types come from the module.
    std::vector<uint64_t> globals;
    /// Function indices, null_element for empty slots.
    std::vector<uint32_t> table;
    /// One entry per imported function.
    std::vector<HostFunction> host_functions;

private:
    Engine& engine_;
    Module& module_;
};
}  // namespace wprobe
