// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "module.hpp"
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace wprobe
{
/// Decodes a Wasm MVP binary. Throws MalformedBinary or UnsupportedFeature.
/// Every FuncDecl comes back with pristine_body == body; the sidetable is
/// filled in later by validate_module().
Module parse_module(std::span<const uint8_t> bytes);

/// Re-encodes a module from its pristine bodies using minimal LEB128s.
std::vector<uint8_t> encode_module(const Module& module);

std::vector<uint8_t> read_file(const std::filesystem::path& path);
}  // namespace wprobe
