// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "module.hpp"
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wprobe
{
struct Instruction
{
    uint32_t pc = 0;
    uint8_t opcode = 0;
    std::string_view mnemonic;
    /// Integer immediates in encoding order; float constants appear as raw
    /// bits and br_table lists every label followed by the default.
    std::vector<int64_t> immediates;
    /// Encoded length including the opcode byte.
    uint32_t length = 1;
};

/// Decodes one instruction at `pc` of `code`. Throws MalformedBinary.
Instruction decode_instruction(std::span<const uint8_t> code, uint32_t pc);

/// Listing of the pristine body; unaffected by probes.
std::vector<Instruction> disassemble(const FuncDecl& func);

/// pcs at which instructions start, ascending.
std::vector<uint32_t> instruction_boundaries(const FuncDecl& func);

/// "i32.const 3", "br_table 0 1 2", "f32.const 1.5".
std::string format_instruction(const Instruction& insn);
}  // namespace wprobe
