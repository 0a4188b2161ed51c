// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/binary.hpp"
#include "wprobe/disassembler.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/leb128.hpp"
#include "wprobe/opcodes.hpp"
#include <atomic>
#include <cstring>
#include <fstream>
#include <iterator>

namespace wprobe
{
namespace
{
constexpr uint8_t wasm_magic[] = {0x00, 0x61, 0x73, 0x6d};
constexpr uint8_t wasm_version[] = {0x01, 0x00, 0x00, 0x00};
constexpr uint32_t max_locals = 50000;

std::atomic<uint32_t> next_module_id{1};

class Reader
{
public:
    Reader(const uint8_t* base, const uint8_t* pos, const uint8_t* end) noexcept
      : base_{base}, pos_{pos}, end_{end}
    {}

    size_t offset() const noexcept { return static_cast<size_t>(pos_ - base_); }
    const uint8_t* pos() const noexcept { return pos_; }
    bool at_end() const noexcept { return pos_ == end_; }

    [[noreturn]] void fail(const std::string& reason) const { throw MalformedBinary(offset(), reason); }

    uint8_t u8()
    {
        if (pos_ == end_)
            fail("unexpected end");
        return *pos_++;
    }

    template <typename T>
    T leb()
    {
        const auto r = leb128::decode<T>(pos_, end_);
        if (!r)
            fail("invalid LEB128 encoding");
        pos_ += r->length;
        return r->value;
    }

    uint32_t u32() { return leb<uint32_t>(); }

    std::vector<uint8_t> bytes(size_t n)
    {
        if (static_cast<size_t>(end_ - pos_) < n)
            fail("unexpected end");
        std::vector<uint8_t> out(pos_, pos_ + n);
        pos_ += n;
        return out;
    }

    std::string name()
    {
        const auto n = u32();
        const auto b = bytes(n);
        return std::string(b.begin(), b.end());
    }

    /// Reader over the next `size` bytes; advances this reader past them.
    Reader sub(uint32_t size)
    {
        if (static_cast<size_t>(end_ - pos_) < size)
            fail("section or body extends past end");
        Reader r{base_, pos_, pos_ + size};
        pos_ += size;
        return r;
    }

    void expect_end(const char* what) const
    {
        if (pos_ != end_)
            fail(std::string("trailing bytes in ") + what);
    }

    const uint8_t* end() const noexcept { return end_; }

private:
    const uint8_t* base_;
    const uint8_t* pos_;
    const uint8_t* end_;
};

ValueType read_value_type(Reader& r)
{
    const auto b = r.u8();
    switch (b)
    {
    case 0x7f:
    case 0x7e:
    case 0x7d:
    case 0x7c:
        return static_cast<ValueType>(b);
    case 0x7b:
        throw UnsupportedFeature("simd");
    case 0x70:
    case 0x6f:
        throw UnsupportedFeature("reference types");
    default:
        r.fail("invalid value type");
    }
}

Limits read_limits(Reader& r)
{
    const auto flag = r.u8();
    Limits l;
    if (flag == 0x00)
        l.min = r.u32();
    else if (flag == 0x01)
    {
        l.min = r.u32();
        l.max = r.u32();
    }
    else if (flag == 0x03 || flag == 0x02)
        throw UnsupportedFeature("shared memory");
    else
        r.fail("invalid limits flag");
    return l;
}

Value read_const_expr(Reader& r)
{
    const auto opcode = r.u8();
    Value v;
    switch (opcode)
    {
    case op::i32_const:
        v = Value::i32(r.leb<int32_t>());
        break;
    case op::i64_const:
        v = Value::i64(r.leb<int64_t>());
        break;
    case op::f32_const:
    {
        const auto b = r.bytes(4);
        uint32_t bits;
        std::memcpy(&bits, b.data(), 4);
        v = {ValueType::f32, bits};
        break;
    }
    case op::f64_const:
    {
        const auto b = r.bytes(8);
        uint64_t bits;
        std::memcpy(&bits, b.data(), 8);
        v = {ValueType::f64, bits};
        break;
    }
    case op::global_get:
        throw UnsupportedFeature("global.get in constant expression");
    default:
        r.fail("invalid constant expression");
    }
    if (r.u8() != op::end)
        r.fail("constant expression not terminated by end");
    return v;
}

uint32_t read_offset_expr(Reader& r)
{
    const auto v = read_const_expr(r);
    if (v.type != ValueType::i32)
        r.fail("segment offset must be i32");
    return v.as_u32();
}

void read_type_section(Reader& r, Module& m)
{
    const auto n = r.u32();
    m.types.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
    {
        if (r.u8() != 0x60)
            r.fail("invalid function type form");
        FuncType t;
        const auto np = r.u32();
        for (uint32_t j = 0; j < np; ++j)
            t.params.push_back(read_value_type(r));
        const auto nr = r.u32();
        if (nr > 1)
            throw UnsupportedFeature("multi-value");
        for (uint32_t j = 0; j < nr; ++j)
            t.results.push_back(read_value_type(r));
        m.types.push_back(std::move(t));
    }
}

void read_import_section(Reader& r, Module& m)
{
    const auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
    {
        Import imp;
        imp.module = r.name();
        imp.name = r.name();
        const auto kind = r.u8();
        switch (kind)
        {
        case 0x00:
            imp.type_index = r.u32();
            break;
        case 0x01:
            throw UnsupportedFeature("table import");
        case 0x02:
            throw UnsupportedFeature("memory import");
        case 0x03:
            throw UnsupportedFeature("global import");
        default:
            r.fail("invalid import kind");
        }
        m.imports.push_back(std::move(imp));
    }
}

std::vector<uint32_t> read_function_section(Reader& r)
{
    const auto n = r.u32();
    std::vector<uint32_t> type_indices;
    type_indices.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
        type_indices.push_back(r.u32());
    return type_indices;
}

void read_table_section(Reader& r, Module& m)
{
    const auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
    {
        const auto elem = r.u8();
        if (elem == 0x6f)
            throw UnsupportedFeature("reference types");
        if (elem != 0x70)
            r.fail("invalid table element type");
        m.tables.push_back(read_limits(r));
    }
}

void read_memory_section(Reader& r, Module& m)
{
    const auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
        m.memories.push_back(read_limits(r));
}

void read_global_section(Reader& r, Module& m)
{
    const auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
    {
        Global g;
        g.type = read_value_type(r);
        const auto mut = r.u8();
        if (mut > 1)
            r.fail("invalid global mutability");
        g.is_mutable = mut == 1;
        g.init = read_const_expr(r);
        m.globals.push_back(g);
    }
}

void read_export_section(Reader& r, Module& m)
{
    const auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
    {
        Export e;
        e.name = r.name();
        const auto kind = r.u8();
        if (kind > 3)
            r.fail("invalid export kind");
        e.kind = static_cast<ExternalKind>(kind);
        e.index = r.u32();
        m.exports.push_back(std::move(e));
    }
}

void read_element_section(Reader& r, Module& m)
{
    const auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
    {
        const auto flags = r.u32();
        if (flags != 0)
            throw UnsupportedFeature("bulk-memory element segment");
        ElementSegment seg;
        seg.offset = read_offset_expr(r);
        const auto count = r.u32();
        for (uint32_t j = 0; j < count; ++j)
            seg.funcs.push_back(r.u32());
        m.elements.push_back(std::move(seg));
    }
}

/// Linear decode pass so that malformed or post-MVP opcodes are reported at
/// parse time with module-relative offsets.
void scan_code(std::span<const uint8_t> code, size_t code_offset)
{
    uint32_t pc = 0;
    try
    {
        while (pc < code.size())
            pc += decode_instruction(code, pc).length;
    }
    catch (const MalformedBinary& e)
    {
        throw MalformedBinary(code_offset + e.offset(), e.reason());
    }
}

void read_code_section(Reader& r, Module& m, const std::vector<uint32_t>& type_indices)
{
    const auto n = r.u32();
    if (n != type_indices.size())
        r.fail("function and code section counts differ");
    m.funcs.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
    {
        const auto size = r.u32();
        Reader body = r.sub(size);
        FuncDecl f;
        f.index = m.num_imported_funcs() + i;
        f.type_index = type_indices[i];
        uint64_t total = 0;
        const auto runs = body.u32();
        for (uint32_t j = 0; j < runs; ++j)
        {
            LocalRun run;
            run.count = body.u32();
            run.type = read_value_type(body);
            total += run.count;
            if (total > max_locals)
                body.fail("too many locals");
            f.local_runs.push_back(run);
        }
        const auto code_offset = body.offset();
        f.body.assign(body.pos(), body.end());
        f.pristine_body = f.body;
        scan_code(f.body, code_offset);
        m.funcs.push_back(std::move(f));
    }
}

void read_data_section(Reader& r, Module& m)
{
    const auto n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
    {
        const auto flags = r.u32();
        if (flags != 0)
            throw UnsupportedFeature("bulk-memory data segment");
        DataSegment seg;
        seg.offset = read_offset_expr(r);
        const auto size = r.u32();
        seg.bytes = r.bytes(size);
        m.data.push_back(std::move(seg));
    }
}
}  // namespace

Module parse_module(std::span<const uint8_t> bytes)
{
    for (size_t i = 0; i < 4; ++i)
    {
        if (i >= bytes.size())
            throw MalformedBinary(i, "unexpected end");
        if (bytes[i] != wasm_magic[i])
            throw MalformedBinary(i, "bad magic");
    }
    for (size_t i = 0; i < 4; ++i)
    {
        if (4 + i >= bytes.size())
            throw MalformedBinary(4 + i, "unexpected end");
        if (bytes[4 + i] != wasm_version[i])
            throw MalformedBinary(4 + i, "unsupported version");
    }

    Module m;
    m.id = next_module_id.fetch_add(1, std::memory_order_relaxed);

    Reader r{bytes.data(), bytes.data() + 8, bytes.data() + bytes.size()};
    std::vector<uint32_t> type_indices;
    bool have_function_section = false;
    bool have_code_section = false;
    uint8_t last_id = 0;
    while (!r.at_end())
    {
        const auto id = r.u8();
        const auto size = r.u32();
        Reader s = r.sub(size);
        if (id == 0)
        {
            CustomSection c;
            c.name = s.name();
            c.payload.assign(s.pos(), s.end());
            c.after_section = last_id;
            m.customs.push_back(std::move(c));
            continue;
        }
        if (id == 12)
            throw UnsupportedFeature("data count section");
        if (id > 12)
            s.fail("unknown section id " + std::to_string(id));
        if (id <= last_id)
            s.fail("section out of order");
        last_id = id;

        switch (id)
        {
        case 1:
            read_type_section(s, m);
            break;
        case 2:
            read_import_section(s, m);
            break;
        case 3:
            type_indices = read_function_section(s);
            have_function_section = true;
            break;
        case 4:
            read_table_section(s, m);
            break;
        case 5:
            read_memory_section(s, m);
            break;
        case 6:
            read_global_section(s, m);
            break;
        case 7:
            read_export_section(s, m);
            break;
        case 8:
            m.start = s.u32();
            break;
        case 9:
            read_element_section(s, m);
            break;
        case 10:
            read_code_section(s, m, type_indices);
            have_code_section = true;
            break;
        case 11:
            read_data_section(s, m);
            break;
        }
        s.expect_end("section");
    }
    if (have_function_section && !type_indices.empty() && !have_code_section)
        throw MalformedBinary(bytes.size(), "function and code section counts differ");
    return m;
}

std::vector<uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}
}  // namespace wprobe
