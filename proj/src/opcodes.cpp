// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/opcodes.hpp"

namespace wprobe
{
namespace
{
constexpr auto I32 = ValueType::i32;
constexpr auto I64 = ValueType::i64;
constexpr auto F32 = ValueType::f32;
constexpr auto F64 = ValueType::f64;

struct TableBuilder
{
    std::array<OpcodeInfo, 256> t{};

    constexpr void special(uint8_t opcode, std::string_view name, Immediate imm = Immediate::none)
    {
        t[opcode] = OpcodeInfo{name, imm, true, false};
    }

    constexpr void unary(uint8_t opcode, std::string_view name, ValueType in, ValueType out)
    {
        auto& e = t[opcode];
        e = OpcodeInfo{name, Immediate::none, true, true};
        e.num_params = 1;
        e.params = {in, in};
        e.has_result = true;
        e.result = out;
    }

    constexpr void binary(uint8_t opcode, std::string_view name, ValueType in, ValueType out)
    {
        unary(opcode, name, in, out);
        t[opcode].num_params = 2;
    }

    constexpr void load(uint8_t opcode, std::string_view name, ValueType out, uint8_t width)
    {
        unary(opcode, name, I32, out);
        t[opcode].immediate = Immediate::memarg;
        t[opcode].access_width = width;
        t[opcode].natural_alignment = static_cast<uint8_t>(std::countr_zero(width));
    }

    constexpr void store(uint8_t opcode, std::string_view name, ValueType in, uint8_t width)
    {
        auto& e = t[opcode];
        e = OpcodeInfo{name, Immediate::memarg, true, true};
        e.num_params = 2;
        e.params = {I32, in};
        e.access_width = width;
        e.natural_alignment = static_cast<uint8_t>(std::countr_zero(width));
    }

    constexpr void constant(uint8_t opcode, std::string_view name, ValueType out, Immediate imm)
    {
        auto& e = t[opcode];
        e = OpcodeInfo{name, imm, true, true};
        e.has_result = true;
        e.result = out;
    }
};

constexpr std::array<OpcodeInfo, 256> build_table()
{
    TableBuilder b;
    b.special(0x00, "unreachable");
    b.special(0x01, "nop");
    b.special(0x02, "block", Immediate::blocktype);
    b.special(0x03, "loop", Immediate::blocktype);
    b.special(0x04, "if", Immediate::blocktype);
    b.special(0x05, "else");
    b.special(0x0b, "end");
    b.special(0x0c, "br", Immediate::label);
    b.special(0x0d, "br_if", Immediate::label);
    b.special(0x0e, "br_table", Immediate::br_table);
    b.special(0x0f, "return");
    b.special(0x10, "call", Immediate::func);
    b.special(0x11, "call_indirect", Immediate::call_indirect);
    b.special(0x1a, "drop");
    b.special(0x1b, "select");
    b.special(0x20, "local.get", Immediate::local);
    b.special(0x21, "local.set", Immediate::local);
    b.special(0x22, "local.tee", Immediate::local);
    b.special(0x23, "global.get", Immediate::global);
    b.special(0x24, "global.set", Immediate::global);

    b.load(0x28, "i32.load", I32, 4);
    b.load(0x29, "i64.load", I64, 8);
    b.load(0x2a, "f32.load", F32, 4);
    b.load(0x2b, "f64.load", F64, 8);
    b.load(0x2c, "i32.load8_s", I32, 1);
    b.load(0x2d, "i32.load8_u", I32, 1);
    b.load(0x2e, "i32.load16_s", I32, 2);
    b.load(0x2f, "i32.load16_u", I32, 2);
    b.load(0x30, "i64.load8_s", I64, 1);
    b.load(0x31, "i64.load8_u", I64, 1);
    b.load(0x32, "i64.load16_s", I64, 2);
    b.load(0x33, "i64.load16_u", I64, 2);
    b.load(0x34, "i64.load32_s", I64, 4);
    b.load(0x35, "i64.load32_u", I64, 4);
    b.store(0x36, "i32.store", I32, 4);
    b.store(0x37, "i64.store", I64, 8);
    b.store(0x38, "f32.store", F32, 4);
    b.store(0x39, "f64.store", F64, 8);
    b.store(0x3a, "i32.store8", I32, 1);
    b.store(0x3b, "i32.store16", I32, 2);
    b.store(0x3c, "i64.store8", I64, 1);
    b.store(0x3d, "i64.store16", I64, 2);
    b.store(0x3e, "i64.store32", I64, 4);
    b.special(0x3f, "memory.size", Immediate::memory_index);
    b.special(0x40, "memory.grow", Immediate::memory_index);

    b.constant(0x41, "i32.const", I32, Immediate::i32);
    b.constant(0x42, "i64.const", I64, Immediate::i64);
    b.constant(0x43, "f32.const", F32, Immediate::f32);
    b.constant(0x44, "f64.const", F64, Immediate::f64);

    b.unary(0x45, "i32.eqz", I32, I32);
    constexpr std::string_view i32_cmp[] = {"i32.eq", "i32.ne", "i32.lt_s", "i32.lt_u",
        "i32.gt_s", "i32.gt_u", "i32.le_s", "i32.le_u", "i32.ge_s", "i32.ge_u"};
    for (uint8_t i = 0; i < 10; ++i)
        b.binary(static_cast<uint8_t>(0x46 + i), i32_cmp[i], I32, I32);
    b.unary(0x50, "i64.eqz", I64, I32);
    constexpr std::string_view i64_cmp[] = {"i64.eq", "i64.ne", "i64.lt_s", "i64.lt_u",
        "i64.gt_s", "i64.gt_u", "i64.le_s", "i64.le_u", "i64.ge_s", "i64.ge_u"};
    for (uint8_t i = 0; i < 10; ++i)
        b.binary(static_cast<uint8_t>(0x51 + i), i64_cmp[i], I64, I32);
    constexpr std::string_view f32_cmp[] = {
        "f32.eq", "f32.ne", "f32.lt", "f32.gt", "f32.le", "f32.ge"};
    for (uint8_t i = 0; i < 6; ++i)
        b.binary(static_cast<uint8_t>(0x5b + i), f32_cmp[i], F32, I32);
    constexpr std::string_view f64_cmp[] = {
        "f64.eq", "f64.ne", "f64.lt", "f64.gt", "f64.le", "f64.ge"};
    for (uint8_t i = 0; i < 6; ++i)
        b.binary(static_cast<uint8_t>(0x61 + i), f64_cmp[i], F64, I32);

    b.unary(0x67, "i32.clz", I32, I32);
    b.unary(0x68, "i32.ctz", I32, I32);
    b.unary(0x69, "i32.popcnt", I32, I32);
    constexpr std::string_view i32_bin[] = {"i32.add", "i32.sub", "i32.mul", "i32.div_s",
        "i32.div_u", "i32.rem_s", "i32.rem_u", "i32.and", "i32.or", "i32.xor", "i32.shl",
        "i32.shr_s", "i32.shr_u", "i32.rotl", "i32.rotr"};
    for (uint8_t i = 0; i < 15; ++i)
        b.binary(static_cast<uint8_t>(0x6a + i), i32_bin[i], I32, I32);
    b.unary(0x79, "i64.clz", I64, I64);
    b.unary(0x7a, "i64.ctz", I64, I64);
    b.unary(0x7b, "i64.popcnt", I64, I64);
    constexpr std::string_view i64_bin[] = {"i64.add", "i64.sub", "i64.mul", "i64.div_s",
        "i64.div_u", "i64.rem_s", "i64.rem_u", "i64.and", "i64.or", "i64.xor", "i64.shl",
        "i64.shr_s", "i64.shr_u", "i64.rotl", "i64.rotr"};
    for (uint8_t i = 0; i < 15; ++i)
        b.binary(static_cast<uint8_t>(0x7c + i), i64_bin[i], I64, I64);

    constexpr std::string_view f32_un[] = {"f32.abs", "f32.neg", "f32.ceil", "f32.floor",
        "f32.trunc", "f32.nearest", "f32.sqrt"};
    for (uint8_t i = 0; i < 7; ++i)
        b.unary(static_cast<uint8_t>(0x8b + i), f32_un[i], F32, F32);
    constexpr std::string_view f32_bin[] = {
        "f32.add", "f32.sub", "f32.mul", "f32.div", "f32.min", "f32.max", "f32.copysign"};
    for (uint8_t i = 0; i < 7; ++i)
        b.binary(static_cast<uint8_t>(0x92 + i), f32_bin[i], F32, F32);
    constexpr std::string_view f64_un[] = {"f64.abs", "f64.neg", "f64.ceil", "f64.floor",
        "f64.trunc", "f64.nearest", "f64.sqrt"};
    for (uint8_t i = 0; i < 7; ++i)
        b.unary(static_cast<uint8_t>(0x99 + i), f64_un[i], F64, F64);
    constexpr std::string_view f64_bin[] = {
        "f64.add", "f64.sub", "f64.mul", "f64.div", "f64.min", "f64.max", "f64.copysign"};
    for (uint8_t i = 0; i < 7; ++i)
        b.binary(static_cast<uint8_t>(0xa0 + i), f64_bin[i], F64, F64);

    b.unary(0xa7, "i32.wrap_i64", I64, I32);
    b.unary(0xa8, "i32.trunc_f32_s", F32, I32);
    b.unary(0xa9, "i32.trunc_f32_u", F32, I32);
    b.unary(0xaa, "i32.trunc_f64_s", F64, I32);
    b.unary(0xab, "i32.trunc_f64_u", F64, I32);
    b.unary(0xac, "i64.extend_i32_s", I32, I64);
    b.unary(0xad, "i64.extend_i32_u", I32, I64);
    b.unary(0xae, "i64.trunc_f32_s", F32, I64);
    b.unary(0xaf, "i64.trunc_f32_u", F32, I64);
    b.unary(0xb0, "i64.trunc_f64_s", F64, I64);
    b.unary(0xb1, "i64.trunc_f64_u", F64, I64);
    b.unary(0xb2, "f32.convert_i32_s", I32, F32);
    b.unary(0xb3, "f32.convert_i32_u", I32, F32);
    b.unary(0xb4, "f32.convert_i64_s", I64, F32);
    b.unary(0xb5, "f32.convert_i64_u", I64, F32);
    b.unary(0xb6, "f32.demote_f64", F64, F32);
    b.unary(0xb7, "f64.convert_i32_s", I32, F64);
    b.unary(0xb8, "f64.convert_i32_u", I32, F64);
    b.unary(0xb9, "f64.convert_i64_s", I64, F64);
    b.unary(0xba, "f64.convert_i64_u", I64, F64);
    b.unary(0xbb, "f64.promote_f32", F32, F64);
    b.unary(0xbc, "i32.reinterpret_f32", F32, I32);
    b.unary(0xbd, "i64.reinterpret_f64", F64, I64);
    b.unary(0xbe, "f32.reinterpret_i32", I32, F32);
    b.unary(0xbf, "f64.reinterpret_i64", I64, F64);
    return b.t;
}

constexpr auto opcode_table = build_table();
}  // namespace

const OpcodeInfo& opcode_info(uint8_t opcode) noexcept
{
    return opcode_table[opcode];
}
}  // namespace wprobe
