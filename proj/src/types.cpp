// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/module.hpp"
#include "wprobe/errors.hpp"
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace wprobe
{
std::string_view to_string(ValueType type) noexcept
{
    switch (type)
    {
    case ValueType::i32:
        return "i32";
    case ValueType::i64:
        return "i64";
    case ValueType::f32:
        return "f32";
    case ValueType::f64:
        return "f64";
    }
    return "?";
}

std::optional<ValueType> parse_value_type(std::string_view name) noexcept
{
    if (name == "i32")
        return ValueType::i32;
    if (name == "i64")
        return ValueType::i64;
    if (name == "f32")
        return ValueType::f32;
    if (name == "f64")
        return ValueType::f64;
    return std::nullopt;
}

std::string to_string(const Value& v)
{
    std::string out{to_string(v.type)};
    out += ':';
    char buf[64];
    switch (v.type)
    {
    case ValueType::i32:
        out += std::to_string(v.as_i32());
        break;
    case ValueType::i64:
        out += std::to_string(v.as_i64());
        break;
    case ValueType::f32:
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v.as_f32()));
        out += buf;
        break;
    case ValueType::f64:
        std::snprintf(buf, sizeof buf, "%.17g", v.as_f64());
        out += buf;
        break;
    }
    return out;
}

std::optional<Value> parse_value(std::string_view text, std::optional<ValueType> hint)
{
    std::optional<ValueType> type = hint;
    if (const auto colon = text.find(':'); colon != std::string_view::npos)
    {
        type = parse_value_type(text.substr(0, colon));
        text.remove_prefix(colon + 1);
    }
    if (!type || text.empty())
        return std::nullopt;

    const std::string s{text};
    char* end = nullptr;
    switch (*type)
    {
    case ValueType::i32:
    case ValueType::i64:
    {
        errno = 0;
        const bool negative = s[0] == '-';
        int64_t v = 0;
        if (negative)
            v = std::strtoll(s.c_str(), &end, 0);
        else
            v = static_cast<int64_t>(std::strtoull(s.c_str(), &end, 0));
        if (errno != 0 || *end != '\0')
            return std::nullopt;
        if (*type == ValueType::i32)
        {
            if (v < INT32_MIN || v > int64_t{UINT32_MAX})
                return std::nullopt;
            return Value::i32(static_cast<int32_t>(static_cast<uint32_t>(v)));
        }
        return Value::i64(v);
    }
    case ValueType::f32:
    {
        const float f = std::strtof(s.c_str(), &end);
        if (*end != '\0')
            return std::nullopt;
        return Value::f32(f);
    }
    case ValueType::f64:
    {
        const double d = std::strtod(s.c_str(), &end);
        if (*end != '\0')
            return std::nullopt;
        return Value::f64(d);
    }
    }
    return std::nullopt;
}

std::string to_string(const CodeLocation& loc)
{
    return "m" + std::to_string(loc.module_id) + ":f" + std::to_string(loc.func_index) + "+" +
           std::to_string(loc.pc);
}

std::string_view to_string(TrapKind kind) noexcept
{
    switch (kind)
    {
    case TrapKind::unreachable:
        return "unreachable";
    case TrapKind::divide_by_zero:
        return "divide-by-zero";
    case TrapKind::integer_overflow:
        return "integer-overflow";
    case TrapKind::invalid_conversion:
        return "invalid-conversion";
    case TrapKind::out_of_bounds:
        return "out-of-bounds";
    case TrapKind::undefined_element:
        return "undefined-element";
    case TrapKind::indirect_call_mismatch:
        return "indirect-call-mismatch";
    case TrapKind::stack_exhausted:
        return "stack-exhausted";
    }
    return "?";
}

std::optional<uint32_t> Sidetable::stack_height(uint32_t pc) const noexcept
{
    if (pc >= stack_node.size())
        return std::nullopt;
    const auto node = stack_node[pc];
    if (node == not_boundary || node == unreachable_code)
        return std::nullopt;
    return nodes[node].depth;
}

std::optional<ValueType> Sidetable::operand_type(uint32_t pc, uint32_t k) const noexcept
{
    if (pc >= stack_node.size())
        return std::nullopt;
    auto node = stack_node[pc];
    if (node == not_boundary || node == unreachable_code || k >= nodes[node].depth)
        return std::nullopt;
    for (uint32_t i = 0; i < k; ++i)
        node = nodes[node].parent;
    return nodes[node].type;
}

const FuncType& Module::func_type(uint32_t func_index) const
{
    if (func_index < imports.size())
        return types.at(imports[func_index].type_index);
    return types.at(funcs.at(func_index - imports.size()).type_index);
}

FuncDecl* Module::func(uint32_t func_index) noexcept
{
    if (func_index < imports.size() || func_index >= num_funcs())
        return nullptr;
    return &funcs[func_index - imports.size()];
}

const FuncDecl* Module::func(uint32_t func_index) const noexcept
{
    return const_cast<Module*>(this)->func(func_index);
}

std::optional<uint32_t> Module::find_export(std::string_view name, ExternalKind kind) const noexcept
{
    for (const auto& e : exports)
        if (e.kind == kind && e.name == name)
            return e.index;
    return std::nullopt;
}

std::optional<std::string_view> Module::export_name(uint32_t func_index) const noexcept
{
    for (const auto& e : exports)
        if (e.kind == ExternalKind::function && e.index == func_index)
            return e.name;
    return std::nullopt;
}
}  // namespace wprobe
