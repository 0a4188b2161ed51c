// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "types.hpp"
#include <array>
#include <cstdint>
#include <string_view>

namespace wprobe
{
namespace op
{
inline constexpr uint8_t unreachable = 0x00;
inline constexpr uint8_t nop = 0x01;
inline constexpr uint8_t block = 0x02;
inline constexpr uint8_t loop = 0x03;
inline constexpr uint8_t if_ = 0x04;
inline constexpr uint8_t else_ = 0x05;
inline constexpr uint8_t end = 0x0b;
inline constexpr uint8_t br = 0x0c;
inline constexpr uint8_t br_if = 0x0d;
inline constexpr uint8_t br_table = 0x0e;
inline constexpr uint8_t return_ = 0x0f;
inline constexpr uint8_t call = 0x10;
inline constexpr uint8_t call_indirect = 0x11;
inline constexpr uint8_t drop = 0x1a;
inline constexpr uint8_t select = 0x1b;
inline constexpr uint8_t local_get = 0x20;
inline constexpr uint8_t local_set = 0x21;
inline constexpr uint8_t local_tee = 0x22;
inline constexpr uint8_t global_get = 0x23;
inline constexpr uint8_t global_set = 0x24;
inline constexpr uint8_t i32_load = 0x28;
inline constexpr uint8_t i64_load32_u = 0x35;
inline constexpr uint8_t i32_store = 0x36;
inline constexpr uint8_t i64_store32 = 0x3e;
inline constexpr uint8_t memory_size = 0x3f;
inline constexpr uint8_t memory_grow = 0x40;
inline constexpr uint8_t i32_const = 0x41;
inline constexpr uint8_t i64_const = 0x42;
inline constexpr uint8_t f32_const = 0x43;
inline constexpr uint8_t f64_const = 0x44;

/// Otherwise-illegal opcode written over the first byte of a probed
/// instruction.
inline constexpr uint8_t probe = 0xff;
}  // namespace op

/// Immediate operand encoding following an opcode byte.
enum class Immediate : uint8_t
{
    none,
    blocktype,
    label,
    br_table,
    func,
    call_indirect,
    local,
    global,
    memarg,
    memory_index,
    i32,
    i64,
    f32,
    f64,
};

/// Static description of one MVP opcode. `params`/`result` describe the
/// stack signature of simple opcodes (numeric, conversions, loads, stores,
/// constants); control and variable instructions have `simple == false`.
struct OpcodeInfo
{
    std::string_view name;
    Immediate immediate = Immediate::none;
    bool valid = false;
    bool simple = false;
    uint8_t num_params = 0;
    std::array<ValueType, 2> params{};
    bool has_result = false;
    ValueType result = ValueType::i32;
    /// Memory access width in bytes (loads and stores), else 0.
    uint8_t access_width = 0;
    /// log2 of the natural alignment for memory accesses.
    uint8_t natural_alignment = 0;
};

const OpcodeInfo& opcode_info(uint8_t opcode) noexcept;

constexpr bool is_load(uint8_t opcode) noexcept
{
    return opcode >= op::i32_load && opcode <= op::i64_load32_u;
}
constexpr bool is_store(uint8_t opcode) noexcept
{
    return opcode >= op::i32_store && opcode <= op::i64_store32;
}
}  // namespace wprobe
