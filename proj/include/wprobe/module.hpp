// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "types.hpp"
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wprobe
{
struct FuncType
{
    std::vector<ValueType> params;
    std::vector<ValueType> results;

    friend bool operator==(const FuncType&, const FuncType&) = default;
};

enum class ExternalKind : uint8_t
{
    function = 0,
    table = 1,
    memory = 2,
    global = 3,
};

/// Only function imports are supported.
struct Import
{
    std::string module;
    std::string name;
    uint32_t type_index = 0;
};

struct Limits
{
    uint32_t min = 0;
    std::optional<uint32_t> max;
};

struct Global
{
    ValueType type = ValueType::i32;
    bool is_mutable = false;
    Value init;
};

struct Export
{
    std::string name;
    ExternalKind kind = ExternalKind::function;
    uint32_t index = 0;
};

struct ElementSegment
{
    uint32_t table_index = 0;
    uint32_t offset = 0;
    std::vector<uint32_t> funcs;
};

struct DataSegment
{
    uint32_t memory_index = 0;
    uint32_t offset = 0;
    std::vector<uint8_t> bytes;
};

/// Custom sections are kept verbatim so encoding reproduces the input.
struct CustomSection
{
    std::string name;
    std::vector<uint8_t> payload;
    /// Id of the last non-custom section preceding this one (0 if none).
    uint8_t after_section = 0;
};

struct LocalRun
{
    uint32_t count = 0;
    ValueType type = ValueType::i32;
};

/// Where a taken branch continues.
struct BranchTarget
{
    static constexpr uint32_t return_target = UINT32_MAX;

    /// pc to continue at, or `return_target` for a branch to the function
    /// label.
    uint32_t target_pc = 0;
    /// Operand count (relative to the frame) at the target label.
    uint32_t height = 0;
    /// Values carried across the branch.
    uint32_t arity = 0;
};

/// One entry of the operand type stack. Each instruction boundary refers to
/// the node on top of the stack before it executes; following `parent`
/// walks towards the bottom. Node 0 is the empty stack.
struct TypeNode
{
    ValueType type = ValueType::i32;
    uint32_t parent = 0;
    uint32_t depth = 0;
};

/// Control-flow and stack-shape metadata produced by validation.
struct Sidetable
{
    static constexpr uint32_t not_boundary = UINT32_MAX;
    static constexpr uint32_t unreachable_code = UINT32_MAX - 1;

    /// Per body byte: index into `targets` for if/else/br/br_if/br_table.
    std::vector<uint32_t> branch_index;
    std::vector<BranchTarget> targets;
    /// Per body byte: type node before the instruction, `not_boundary` for
    /// bytes that do not start an instruction, `unreachable_code` for
    /// boundaries in statically unreachable code.
    std::vector<uint32_t> stack_node;
    std::vector<TypeNode> nodes;
    uint32_t max_stack_height = 0;

    bool is_boundary(uint32_t pc) const noexcept
    {
        return pc < stack_node.size() && stack_node[pc] != not_boundary;
    }
    /// Operand count before the instruction at `pc`, if reachable.
    std::optional<uint32_t> stack_height(uint32_t pc) const noexcept;
    /// Type of operand `k` (0 = top) before the instruction at `pc`.
    std::optional<ValueType> operand_type(uint32_t pc, uint32_t k) const noexcept;
};

struct FuncDecl
{
    /// Absolute function index (imports come first).
    uint32_t index = 0;
    uint32_t type_index = 0;
    std::vector<LocalRun> local_runs;
    /// Parameters followed by declared locals.
    std::vector<ValueType> local_types;
    /// Live code; probe insertion overwrites opcode bytes in place.
    std::vector<uint8_t> body;
    /// Code as decoded; never modified.
    std::vector<uint8_t> pristine_body;
    Sidetable sidetable;
    bool validated = false;

    uint32_t num_locals() const noexcept { return static_cast<uint32_t>(local_types.size()); }
};

struct Module
{
    /// Process-unique, assigned when the module is decoded.
    uint32_t id = 0;
    std::vector<FuncType> types;
    std::vector<Import> imports;
    /// Defined functions; funcs[i].index == imports.size() + i.
    std::vector<FuncDecl> funcs;
    std::vector<Limits> tables;
    std::vector<Limits> memories;
    std::vector<Global> globals;
    std::vector<Export> exports;
    std::optional<uint32_t> start;
    std::vector<ElementSegment> elements;
    std::vector<DataSegment> data;
    std::vector<CustomSection> customs;
    bool validated = false;

    uint32_t num_imported_funcs() const noexcept { return static_cast<uint32_t>(imports.size()); }
    uint32_t num_funcs() const noexcept
    {
        return static_cast<uint32_t>(imports.size() + funcs.size());
    }
    bool is_import(uint32_t func_index) const noexcept { return func_index < imports.size(); }

    /// Signature of any function, imported or defined.
    const FuncType& func_type(uint32_t func_index) const;
    /// Defined function by absolute index; nullptr for imports or out of range.
    FuncDecl* func(uint32_t func_index) noexcept;
    const FuncDecl* func(uint32_t func_index) const noexcept;

    std::optional<uint32_t> find_export(std::string_view name, ExternalKind kind) const noexcept;
    /// Name of an exported function, if any.
    std::optional<std::string_view> export_name(uint32_t func_index) const noexcept;
};
}  // namespace wprobe
