// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/binary.hpp"
#include "wprobe/leb128.hpp"
#include "wprobe/opcodes.hpp"
#include <cstring>

namespace wprobe
{
namespace
{
using bytes = std::vector<uint8_t>;

void put_u32(bytes& out, uint32_t v)
{
    leb128::encode(out, v);
}

void put_name(bytes& out, std::string_view s)
{
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

void put_limits(bytes& out, const Limits& l)
{
    out.push_back(l.max ? 0x01 : 0x00);
    put_u32(out, l.min);
    if (l.max)
        put_u32(out, *l.max);
}

void put_const(bytes& out, const Value& v)
{
    switch (v.type)
    {
    case ValueType::i32:
        out.push_back(op::i32_const);
        leb128::encode(out, v.as_i32());
        break;
    case ValueType::i64:
        out.push_back(op::i64_const);
        leb128::encode(out, v.as_i64());
        break;
    case ValueType::f32:
    {
        out.push_back(op::f32_const);
        const auto bits = static_cast<uint32_t>(v.bits);
        uint8_t b[4];
        std::memcpy(b, &bits, 4);
        out.insert(out.end(), b, b + 4);
        break;
    }
    case ValueType::f64:
    {
        out.push_back(op::f64_const);
        uint8_t b[8];
        std::memcpy(b, &v.bits, 8);
        out.insert(out.end(), b, b + 8);
        break;
    }
    }
    out.push_back(op::end);
}

void put_section(bytes& out, uint8_t id, const bytes& content)
{
    out.push_back(id);
    put_u32(out, static_cast<uint32_t>(content.size()));
    out.insert(out.end(), content.begin(), content.end());
}

void put_customs_after(bytes& out, const Module& m, uint8_t id)
{
    for (const auto& c : m.customs)
    {
        if (c.after_section != id)
            continue;
        bytes content;
        put_name(content, c.name);
        content.insert(content.end(), c.payload.begin(), c.payload.end());
        put_section(out, 0, content);
    }
}
}  // namespace

std::vector<uint8_t> encode_module(const Module& m)
{
    bytes out{0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00};
    put_customs_after(out, m, 0);

    auto emit = [&](uint8_t id, bool present, auto&& fill) {
        if (present)
        {
            bytes content;
            fill(content);
            put_section(out, id, content);
        }
        put_customs_after(out, m, id);
    };

    emit(1, !m.types.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.types.size()));
        for (const auto& t : m.types)
        {
            c.push_back(0x60);
            put_u32(c, static_cast<uint32_t>(t.params.size()));
            for (auto p : t.params)
                c.push_back(static_cast<uint8_t>(p));
            put_u32(c, static_cast<uint32_t>(t.results.size()));
            for (auto r : t.results)
                c.push_back(static_cast<uint8_t>(r));
        }
    });
    emit(2, !m.imports.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.imports.size()));
        for (const auto& imp : m.imports)
        {
            put_name(c, imp.module);
            put_name(c, imp.name);
            c.push_back(0x00);
            put_u32(c, imp.type_index);
        }
    });
    emit(3, !m.funcs.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.funcs.size()));
        for (const auto& f : m.funcs)
            put_u32(c, f.type_index);
    });
    emit(4, !m.tables.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.tables.size()));
        for (const auto& t : m.tables)
        {
            c.push_back(0x70);
            put_limits(c, t);
        }
    });
    emit(5, !m.memories.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.memories.size()));
        for (const auto& mem : m.memories)
            put_limits(c, mem);
    });
    emit(6, !m.globals.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.globals.size()));
        for (const auto& g : m.globals)
        {
            c.push_back(static_cast<uint8_t>(g.type));
            c.push_back(g.is_mutable ? 1 : 0);
            put_const(c, g.init);
        }
    });
    emit(7, !m.exports.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.exports.size()));
        for (const auto& e : m.exports)
        {
            put_name(c, e.name);
            c.push_back(static_cast<uint8_t>(e.kind));
            put_u32(c, e.index);
        }
    });
    emit(8, m.start.has_value(), [&](bytes& c) { put_u32(c, *m.start); });
    emit(9, !m.elements.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.elements.size()));
        for (const auto& seg : m.elements)
        {
            put_u32(c, 0);
            put_const(c, Value::i32(static_cast<int32_t>(seg.offset)));
            put_u32(c, static_cast<uint32_t>(seg.funcs.size()));
            for (auto f : seg.funcs)
                put_u32(c, f);
        }
    });
    emit(10, !m.funcs.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.funcs.size()));
        for (const auto& f : m.funcs)
        {
            bytes body;
            put_u32(body, static_cast<uint32_t>(f.local_runs.size()));
            for (const auto& run : f.local_runs)
            {
                put_u32(body, run.count);
                body.push_back(static_cast<uint8_t>(run.type));
            }
            body.insert(body.end(), f.pristine_body.begin(), f.pristine_body.end());
            put_u32(c, static_cast<uint32_t>(body.size()));
            c.insert(c.end(), body.begin(), body.end());
        }
    });
    emit(11, !m.data.empty(), [&](bytes& c) {
        put_u32(c, static_cast<uint32_t>(m.data.size()));
        for (const auto& seg : m.data)
        {
            put_u32(c, 0);
            put_const(c, Value::i32(static_cast<int32_t>(seg.offset)));
            put_u32(c, static_cast<uint32_t>(seg.bytes.size()));
            c.insert(c.end(), seg.bytes.begin(), seg.bytes.end());
        }
    });
    return out;
}
}  // namespace wprobe
