// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wprobe
{
enum class ValueType : uint8_t
{
    i32 = 0x7f,
    i64 = 0x7e,
    f32 = 0x7d,
    f64 = 0x7c,
};

std::string_view to_string(ValueType type) noexcept;
std::optional<ValueType> parse_value_type(std::string_view name) noexcept;

/// A tagged Wasm value. The payload is kept as raw bits so that equality is
/// bit-exact, including for NaNs and signed zeros. 32-bit payloads are
/// zero-extended.
struct Value
{
    ValueType type = ValueType::i32;
    uint64_t bits = 0;

    static constexpr Value i32(int32_t v) noexcept
    {
        return {ValueType::i32, static_cast<uint32_t>(v)};
    }
    static constexpr Value i64(int64_t v) noexcept
    {
        return {ValueType::i64, static_cast<uint64_t>(v)};
    }
    static constexpr Value f32(float v) noexcept
    {
        return {ValueType::f32, std::bit_cast<uint32_t>(v)};
    }
    static constexpr Value f64(double v) noexcept
    {
        return {ValueType::f64, std::bit_cast<uint64_t>(v)};
    }
    /// Zero value of the given type.
    static constexpr Value zero(ValueType t) noexcept { return {t, 0}; }

    constexpr int32_t as_i32() const noexcept { return static_cast<int32_t>(bits); }
    constexpr uint32_t as_u32() const noexcept { return static_cast<uint32_t>(bits); }
    constexpr int64_t as_i64() const noexcept { return static_cast<int64_t>(bits); }
    constexpr float as_f32() const noexcept
    {
        return std::bit_cast<float>(static_cast<uint32_t>(bits));
    }
    constexpr double as_f64() const noexcept { return std::bit_cast<double>(bits); }

    friend constexpr bool operator==(const Value&, const Value&) noexcept = default;
};

/// Renders as "i32:3", "f64:-2.5" etc.
std::string to_string(const Value& v);

/// Parses "i32:3" style text; a bare number is accepted when `hint` is given.
std::optional<Value> parse_value(std::string_view text, std::optional<ValueType> hint = {});

/// (module, function, pc): the address of every probe. `pc` is the byte
/// offset of an instruction from the start of the function's code (after the
/// locals declarations); `func_index` is the absolute function index.
struct CodeLocation
{
    uint32_t module_id = 0;
    uint32_t func_index = 0;
    uint32_t pc = 0;

    friend constexpr auto operator<=>(const CodeLocation&, const CodeLocation&) noexcept = default;
};

std::string to_string(const CodeLocation& loc);

enum class TrapKind : uint8_t
{
    unreachable,
    divide_by_zero,
    integer_overflow,
    invalid_conversion,
    out_of_bounds,
    undefined_element,
    indirect_call_mismatch,
    stack_exhausted,
};

std::string_view to_string(TrapKind kind) noexcept;

struct Trap
{
    TrapKind kind = TrapKind::unreachable;
    CodeLocation location;

    friend constexpr bool operator==(const Trap&, const Trap&) noexcept = default;
};
}  // namespace wprobe

template <>
struct std::hash<wprobe::CodeLocation>
{
    size_t operator()(const wprobe::CodeLocation& l) const noexcept
    {
        const uint64_t a = (uint64_t{l.module_id} << 32) | l.func_index;
        return std::hash<uint64_t>{}(a * 0x9e3779b97f4a7c15ULL ^ l.pc);
    }
};
