// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/validator.hpp"
#include "wprobe/disassembler.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/opcodes.hpp"
#include <set>

namespace wprobe
{
namespace
{
constexpr uint32_t no_node = UINT32_MAX;
constexpr uint32_t no_target = UINT32_MAX;
constexpr uint32_t max_pages = 65536;

struct Operand
{
    std::optional<ValueType> type;  // nullopt: unknown (dead code only)
    uint32_t node = no_node;
};

struct ControlFrame
{
    uint8_t opcode = 0;  // 0 for the function body
    std::optional<ValueType> result;
    uint32_t height = 0;
    bool unreachable = false;
    uint32_t header_pc = 0;
    std::vector<uint32_t> end_fixups;  // targets continuing after `end`
    uint32_t if_target = no_target;
    uint32_t else_target = no_target;
};

class FunctionValidator
{
public:
    FunctionValidator(const Module& m, FuncDecl& f) : m_{m}, f_{f}, st_{f.sidetable} {}

    void run()
    {
        const auto& type = m_.types.at(f_.type_index);
        st_ = Sidetable{};
        const auto size = static_cast<uint32_t>(f_.pristine_body.size());
        st_.branch_index.assign(size, no_target);
        st_.stack_node.assign(size, Sidetable::not_boundary);
        st_.nodes.push_back(TypeNode{ValueType::i32, 0, 0});

        ControlFrame fn;
        fn.result = type.results.empty() ? std::nullopt : std::optional{type.results[0]};
        ctrl_.push_back(std::move(fn));

        uint32_t pc = 0;
        while (pc < size)
        {
            if (ctrl_.empty())
                fail(pc, "instructions after function end");
            pc_ = pc;
            st_.stack_node[pc] = reachable() ? top_node() : Sidetable::unreachable_code;
            const auto insn = decode_instruction(f_.pristine_body, pc);
            check(insn);
            pc += insn.length;
        }
        if (!ctrl_.empty())
            fail(size, "missing end");
    }

private:
    [[noreturn]] void fail(uint32_t pc, const std::string& reason) const
    {
        throw ValidationError(CodeLocation{m_.id, f_.index, pc}, reason);
    }
    [[noreturn]] void fail(const std::string& reason) const { fail(pc_, reason); }

    bool reachable() const noexcept
    {
        for (const auto& c : ctrl_)
            if (c.unreachable)
                return false;
        return true;
    }

    uint32_t top_node() const noexcept { return ops_.empty() ? 0 : ops_.back().node; }

    void push(std::optional<ValueType> t)
    {
        Operand o{t, no_node};
        const uint32_t parent = top_node();
        if (t && parent != no_node)
        {
            o.node = static_cast<uint32_t>(st_.nodes.size());
            st_.nodes.push_back(TypeNode{*t, parent, static_cast<uint32_t>(ops_.size() + 1)});
        }
        ops_.push_back(o);
        st_.max_stack_height = std::max(st_.max_stack_height, static_cast<uint32_t>(ops_.size()));
    }

    std::optional<ValueType> pop()
    {
        auto& frame = ctrl_.back();
        if (ops_.size() == frame.height)
        {
            if (frame.unreachable)
                return std::nullopt;
            fail("stack underflow");
        }
        const auto t = ops_.back().type;
        ops_.pop_back();
        return t;
    }

    std::optional<ValueType> pop(ValueType expected)
    {
        const auto actual = pop();
        if (actual && *actual != expected)
            fail("type mismatch: expected " + std::string(to_string(expected)) + ", got " +
                 std::string(to_string(*actual)));
        return actual ? actual : std::optional{expected};
    }

    void set_unreachable()
    {
        auto& frame = ctrl_.back();
        ops_.resize(frame.height);
        frame.unreachable = true;
    }

    /// Types carried by a branch to `frame`.
    static std::optional<ValueType> label_type(const ControlFrame& frame)
    {
        return frame.opcode == op::loop ? std::nullopt : frame.result;
    }

    ControlFrame& label(uint32_t depth)
    {
        if (depth >= ctrl_.size())
            fail("invalid branch depth " + std::to_string(depth));
        return ctrl_[ctrl_.size() - 1 - depth];
    }

    uint32_t add_target(ControlFrame& frame)
    {
        BranchTarget t;
        t.height = frame.height;
        t.arity = label_type(frame) ? 1 : 0;
        const auto index = static_cast<uint32_t>(st_.targets.size());
        if (frame.opcode == op::loop)
            t.target_pc = frame.header_pc;
        else if (&frame == &ctrl_.front())
            t.target_pc = BranchTarget::return_target;
        else
            frame.end_fixups.push_back(index);
        st_.targets.push_back(t);
        return index;
    }

    void pop_frame_results(const ControlFrame& frame)
    {
        if (frame.result)
            pop(*frame.result);
        if (ops_.size() != frame.height)
            fail("values remaining on stack at end of block");
    }

    void open_block(const Instruction& insn)
    {
        ControlFrame c;
        c.opcode = insn.opcode;
        if (insn.immediates[0] != 0x40)
            c.result = static_cast<ValueType>(insn.immediates[0]);
        c.height = static_cast<uint32_t>(ops_.size());
        c.header_pc = insn.pc + insn.length;
        ctrl_.push_back(std::move(c));
    }

    void check_memarg(const Instruction& insn, const OpcodeInfo& info)
    {
        if (m_.memories.empty())
            fail("memory access without memory");
        if (insn.immediates[0] > info.natural_alignment)
            fail("alignment larger than natural");
    }

    void check(const Instruction& insn)
    {
        const auto& info = opcode_info(insn.opcode);
        if (info.simple)
        {
            if (info.immediate == Immediate::memarg)
                check_memarg(insn, info);
            for (int i = info.num_params - 1; i >= 0; --i)
                pop(info.params[i]);
            if (info.has_result)
                push(info.result);
            return;
        }

        const uint32_t pc = insn.pc;
        switch (insn.opcode)
        {
        case op::unreachable:
            set_unreachable();
            break;
        case op::nop:
            break;
        case op::block:
        case op::loop:
            open_block(insn);
            break;
        case op::if_:
        {
            pop(ValueType::i32);
            open_block(insn);
            BranchTarget t;
            t.height = ctrl_.back().height;
            ctrl_.back().if_target = static_cast<uint32_t>(st_.targets.size());
            st_.branch_index[pc] = ctrl_.back().if_target;
            st_.targets.push_back(t);
            break;
        }
        case op::else_:
        {
            auto& frame = ctrl_.back();
            if (frame.opcode != op::if_ || frame.else_target != no_target)
                fail("else without matching if");
            pop_frame_results(frame);
            st_.targets[frame.if_target].target_pc = pc + 1;
            frame.else_target = static_cast<uint32_t>(st_.targets.size());
            st_.branch_index[pc] = frame.else_target;
            st_.targets.push_back(BranchTarget{0, frame.height, 0});
            frame.unreachable = false;
            break;
        }
        case op::end:
        {
            auto frame = std::move(ctrl_.back());
            pop_frame_results(frame);
            if (frame.opcode == op::if_)
            {
                if (frame.else_target == no_target)
                {
                    if (frame.result)
                        fail("if without else must not produce a value");
                    st_.targets[frame.if_target].target_pc = pc;
                }
                else
                    st_.targets[frame.else_target].target_pc = pc;
            }
            for (const auto t : frame.end_fixups)
                st_.targets[t].target_pc = pc + 1;
            ctrl_.pop_back();
            if (ctrl_.empty())
            {
                if (pc + 1 != f_.pristine_body.size())
                    fail("instructions after function end");
                break;
            }
            if (frame.result)
                push(frame.result);
            break;
        }
        case op::br:
        {
            auto& target = label(static_cast<uint32_t>(insn.immediates[0]));
            if (const auto t = label_type(target))
                pop(*t);
            st_.branch_index[pc] = add_target(target);
            set_unreachable();
            break;
        }
        case op::br_if:
        {
            pop(ValueType::i32);
            auto& target = label(static_cast<uint32_t>(insn.immediates[0]));
            const auto t = label_type(target);
            if (t)
            {
                pop(*t);
                push(*t);
            }
            st_.branch_index[pc] = add_target(target);
            break;
        }
        case op::br_table:
        {
            pop(ValueType::i32);
            const auto& imms = insn.immediates;
            const auto default_type = label_type(label(static_cast<uint32_t>(imms.back())));
            for (const auto depth : imms)
                if (label_type(label(static_cast<uint32_t>(depth))) != default_type)
                    fail("br_table labels have inconsistent types");
            if (default_type)
                pop(*default_type);
            const auto first = static_cast<uint32_t>(st_.targets.size());
            for (const auto depth : imms)
                add_target(label(static_cast<uint32_t>(depth)));
            st_.branch_index[pc] = first;
            set_unreachable();
            break;
        }
        case op::return_:
        {
            if (ctrl_.front().result)
                pop(*ctrl_.front().result);
            set_unreachable();
            break;
        }
        case op::call:
        {
            const auto callee = static_cast<uint32_t>(insn.immediates[0]);
            if (callee >= m_.num_funcs())
                fail("call to unknown function " + std::to_string(callee));
            apply_signature(m_.func_type(callee));
            break;
        }
        case op::call_indirect:
        {
            if (m_.tables.empty())
                fail("call_indirect without table");
            const auto type_index = static_cast<uint32_t>(insn.immediates[0]);
            if (type_index >= m_.types.size())
                fail("call_indirect with unknown type");
            pop(ValueType::i32);
            apply_signature(m_.types[type_index]);
            break;
        }
        case op::drop:
            pop();
            break;
        case op::select:
        {
            pop(ValueType::i32);
            const auto b = pop();
            const auto a = pop();
            if (a && b && *a != *b)
                fail("select operands differ in type");
            push(a ? a : b);
            break;
        }
        case op::local_get:
        case op::local_set:
        case op::local_tee:
        {
            const auto index = static_cast<uint32_t>(insn.immediates[0]);
            if (index >= f_.local_types.size())
                fail("unknown local " + std::to_string(index));
            const auto t = f_.local_types[index];
            if (insn.opcode == op::local_get)
                push(t);
            else
            {
                pop(t);
                if (insn.opcode == op::local_tee)
                    push(t);
            }
            break;
        }
        case op::global_get:
        case op::global_set:
        {
            const auto index = static_cast<uint32_t>(insn.immediates[0]);
            if (index >= m_.globals.size())
                fail("unknown global " + std::to_string(index));
            const auto& g = m_.globals[index];
            if (insn.opcode == op::global_get)
                push(g.type);
            else
            {
                if (!g.is_mutable)
                    fail("global.set of immutable global");
                pop(g.type);
            }
            break;
        }
        case op::memory_size:
            if (m_.memories.empty())
                fail("memory.size without memory");
            push(ValueType::i32);
            break;
        case op::memory_grow:
            if (m_.memories.empty())
                fail("memory.grow without memory");
            pop(ValueType::i32);
            push(ValueType::i32);
            break;
        default:
            fail("unexpected opcode");
        }
    }

    void apply_signature(const FuncType& sig)
    {
        for (auto it = sig.params.rbegin(); it != sig.params.rend(); ++it)
            pop(*it);
        for (const auto r : sig.results)
            push(r);
    }

    const Module& m_;
    FuncDecl& f_;
    Sidetable& st_;
    std::vector<Operand> ops_;
    std::vector<ControlFrame> ctrl_;
    uint32_t pc_ = 0;
};

[[noreturn]] void module_error(const Module& m, const std::string& reason)
{
    throw ValidationError(CodeLocation{m.id, UINT32_MAX, UINT32_MAX}, reason);
}

void check_limits(const Module& m, const Limits& l, uint32_t bound, const char* what)
{
    if (l.min > bound || (l.max && *l.max > bound))
        module_error(m, std::string(what) + " size exceeds limit");
    if (l.max && *l.max < l.min)
        module_error(m, std::string(what) + " maximum below minimum");
}

void validate_module_level(Module& m)
{
    for (const auto& imp : m.imports)
        if (imp.type_index >= m.types.size())
            module_error(m, "import with unknown type");
    for (auto& f : m.funcs)
    {
        if (f.type_index >= m.types.size())
            module_error(m, "function with unknown type");
        f.local_types = m.types[f.type_index].params;
        for (const auto& run : f.local_runs)
            f.local_types.insert(f.local_types.end(), run.count, run.type);
    }
    if (m.tables.size() > 1)
        module_error(m, "multiple tables");
    if (m.memories.size() > 1)
        module_error(m, "multiple memories");
    for (const auto& t : m.tables)
        check_limits(m, t, UINT32_MAX, "table");
    for (const auto& mem : m.memories)
        check_limits(m, mem, max_pages, "memory");
    for (const auto& g : m.globals)
        if (g.init.type != g.type)
            module_error(m, "global initializer type mismatch");

    std::set<std::string_view> names;
    for (const auto& e : m.exports)
    {
        if (!names.insert(e.name).second)
            module_error(m, "duplicate export name " + e.name);
        const size_t limit = e.kind == ExternalKind::function ? m.num_funcs()
                             : e.kind == ExternalKind::table  ? m.tables.size()
                             : e.kind == ExternalKind::memory ? m.memories.size()
                                                              : m.globals.size();
        if (e.index >= limit)
            module_error(m, "export of unknown index: " + e.name);
    }
    if (m.start)
    {
        if (*m.start >= m.num_funcs())
            module_error(m, "unknown start function");
        const auto& t = m.func_type(*m.start);
        if (!t.params.empty() || !t.results.empty())
            module_error(m, "start function must have type [] -> []");
    }
    for (const auto& seg : m.elements)
    {
        if (m.tables.empty())
            module_error(m, "element segment without table");
        for (const auto f : seg.funcs)
            if (f >= m.num_funcs())
                module_error(m, "element segment references unknown function");
    }
    if (!m.data.empty() && m.memories.empty())
        module_error(m, "data segment without memory");
}
}  // namespace

ValidationReport validate_module(Module& module)
{
    ValidationReport report;
    try
    {
        validate_or_throw(module);
    }
    catch (const ValidationError& e)
    {
        report.ok = false;
        report.location = e.location();
        report.reason = e.reason();
    }
    return report;
}

void validate_or_throw(Module& module)
{
    module.validated = false;
    validate_module_level(module);
    for (auto& f : module.funcs)
    {
        f.validated = false;
        FunctionValidator{module, f}.run();
        f.validated = true;
    }
    module.validated = true;
}
}  // namespace wprobe
