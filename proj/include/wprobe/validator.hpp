// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "module.hpp"
#include <optional>
#include <string>

namespace wprobe
{
struct ValidationReport
{
    bool ok = true;
    /// First error found; function-level errors carry the offending pc,
    /// module-level errors use func_index = pc = UINT32_MAX.
    std::optional<CodeLocation> location;
    std::string reason;
};

/// Type-checks every function and fills in each FuncDecl's sidetable.
ValidationReport validate_module(Module& module);

/// validate_module() that throws ValidationError on failure.
void validate_or_throw(Module& module);
}  // namespace wprobe
