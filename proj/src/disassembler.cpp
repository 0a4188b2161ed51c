// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/disassembler.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/leb128.hpp"
#include "wprobe/opcodes.hpp"
#include <bit>
#include <cstdio>
#include <cstring>

namespace wprobe
{
namespace
{
[[noreturn]] void unsupported_opcode(uint8_t opcode, uint32_t pc)
{
    switch (opcode)
    {
    case 0x06:
    case 0x07:
    case 0x08:
    case 0x09:
    case 0x18:
    case 0x19:
        throw UnsupportedFeature("exception handling");
    case 0x12:
    case 0x13:
        throw UnsupportedFeature("tail calls");
    case 0x1c:
    case 0x25:
    case 0x26:
    case 0xd0:
    case 0xd1:
    case 0xd2:
        throw UnsupportedFeature("reference types");
    case 0xc0:
    case 0xc1:
    case 0xc2:
    case 0xc3:
    case 0xc4:
        throw UnsupportedFeature("sign-extension operators");
    case 0xfc:
        throw UnsupportedFeature("0xfc-prefixed operators");
    case 0xfd:
        throw UnsupportedFeature("simd");
    case 0xfe:
        throw UnsupportedFeature("threads");
    default:
        throw MalformedBinary(pc, "invalid opcode " + std::to_string(opcode));
    }
}

class Cursor
{
public:
    Cursor(std::span<const uint8_t> code, uint32_t pos) : code_{code}, pos_{pos} {}

    uint32_t pos() const noexcept { return pos_; }

    uint8_t u8()
    {
        if (pos_ >= code_.size())
            throw MalformedBinary(pos_, "unexpected end of code");
        return code_[pos_++];
    }

    template <typename T>
    T leb()
    {
        const auto r = leb128::decode<T>(code_.data() + pos_, code_.data() + code_.size());
        if (!r)
            throw MalformedBinary(pos_, "invalid LEB128 immediate");
        pos_ += r->length;
        return r->value;
    }

    uint64_t raw(uint32_t n)
    {
        if (pos_ + n > code_.size())
            throw MalformedBinary(pos_, "unexpected end of code");
        uint64_t bits = 0;
        std::memcpy(&bits, code_.data() + pos_, n);
        pos_ += n;
        return bits;
    }

private:
    std::span<const uint8_t> code_;
    uint32_t pos_;
};
}  // namespace

Instruction decode_instruction(std::span<const uint8_t> code, uint32_t pc)
{
    Cursor c{code, pc};
    Instruction insn;
    insn.pc = pc;
    insn.opcode = c.u8();
    const auto& info = opcode_info(insn.opcode);
    if (!info.valid)
        unsupported_opcode(insn.opcode, pc);
    insn.mnemonic = info.name;

    switch (info.immediate)
    {
    case Immediate::none:
        break;
    case Immediate::blocktype:
    {
        const auto bt = c.u8();
        if (bt != 0x40 && bt != 0x7f && bt != 0x7e && bt != 0x7d && bt != 0x7c)
        {
            if (bt < 0x40 || bt >= 0x80)
                throw UnsupportedFeature("multi-value block type");
            if (bt == 0x7b)
                throw UnsupportedFeature("simd");
            if (bt == 0x70 || bt == 0x6f)
                throw UnsupportedFeature("reference types");
            throw MalformedBinary(pc + 1, "invalid block type");
        }
        insn.immediates.push_back(bt);
        break;
    }
    case Immediate::label:
    case Immediate::func:
    case Immediate::local:
    case Immediate::global:
        insn.immediates.push_back(c.leb<uint32_t>());
        break;
    case Immediate::br_table:
    {
        const auto n = c.leb<uint32_t>();
        if (n > code.size())
            throw MalformedBinary(pc + 1, "br_table too long");
        for (uint32_t i = 0; i <= n; ++i)
            insn.immediates.push_back(c.leb<uint32_t>());
        break;
    }
    case Immediate::call_indirect:
        insn.immediates.push_back(c.leb<uint32_t>());
        if (c.u8() != 0)
            throw MalformedBinary(c.pos() - 1, "call_indirect reserved byte must be zero");
        break;
    case Immediate::memarg:
        insn.immediates.push_back(c.leb<uint32_t>());
        insn.immediates.push_back(c.leb<uint32_t>());
        break;
    case Immediate::memory_index:
        if (c.u8() != 0)
            throw MalformedBinary(c.pos() - 1, "memory index must be zero");
        break;
    case Immediate::i32:
        insn.immediates.push_back(c.leb<int32_t>());
        break;
    case Immediate::i64:
        insn.immediates.push_back(c.leb<int64_t>());
        break;
    case Immediate::f32:
        insn.immediates.push_back(static_cast<int64_t>(c.raw(4)));
        break;
    case Immediate::f64:
        insn.immediates.push_back(static_cast<int64_t>(c.raw(8)));
        break;
    }
    insn.length = c.pos() - pc;
    return insn;
}

std::vector<Instruction> disassemble(const FuncDecl& func)
{
    std::vector<Instruction> out;
    const std::span<const uint8_t> code{func.pristine_body};
    uint32_t pc = 0;
    while (pc < code.size())
    {
        out.push_back(decode_instruction(code, pc));
        pc += out.back().length;
    }
    return out;
}

std::vector<uint32_t> instruction_boundaries(const FuncDecl& func)
{
    std::vector<uint32_t> out;
    const std::span<const uint8_t> code{func.pristine_body};
    uint32_t pc = 0;
    while (pc < code.size())
    {
        out.push_back(pc);
        pc += decode_instruction(code, pc).length;
    }
    return out;
}

std::string format_instruction(const Instruction& insn)
{
    std::string out{insn.mnemonic};
    const auto& info = opcode_info(insn.opcode);
    char buf[48];
    for (const auto imm : insn.immediates)
    {
        out += ' ';
        switch (info.immediate)
        {
        case Immediate::f32:
            std::snprintf(buf, sizeof buf, "%.9g",
                static_cast<double>(std::bit_cast<float>(static_cast<uint32_t>(imm))));
            out += buf;
            break;
        case Immediate::f64:
            std::snprintf(buf, sizeof buf, "%.17g", std::bit_cast<double>(imm));
            out += buf;
            break;
        case Immediate::blocktype:
            out += imm == 0x40 ? std::string_view{"[]"} : to_string(static_cast<ValueType>(imm));
            break;
        default:
            out += std::to_string(imm);
        }
    }
    return out;
}
}  // namespace wprobe
