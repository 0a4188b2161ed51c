// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "engine_data.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/numeric.hpp"
#include "wprobe/opcodes.hpp"
#include <algorithm>
#include <bit>
#include <cstring>
#include <new>

// The probe-free instantiation of the dispatch loop leaves probe labels unreferenced.
#pragma GCC diagnostic ignored "-Wunused-label"

namespace wprobe::detail
{
namespace
{
using numeric::Fault;

inline uint32_t u32(uint64_t s) noexcept
{
    return static_cast<uint32_t>(s);
}
inline int32_t s32(uint64_t s) noexcept
{
    return static_cast<int32_t>(static_cast<uint32_t>(s));
}
inline uint64_t u64(uint64_t s) noexcept
{
    return s;
}
inline int64_t s64(uint64_t s) noexcept
{
    return static_cast<int64_t>(s);
}
inline float f32(uint64_t s) noexcept
{
    return std::bit_cast<float>(static_cast<uint32_t>(s));
}
inline double f64(uint64_t s) noexcept
{
    return std::bit_cast<double>(s);
}

inline uint64_t box(bool v) noexcept
{
    return v ? 1 : 0;
}
inline uint64_t box(int32_t v) noexcept
{
    return static_cast<uint32_t>(v);
}
inline uint64_t box(uint32_t v) noexcept
{
    return v;
}
inline uint64_t box(int64_t v) noexcept
{
    return static_cast<uint64_t>(v);
}
inline uint64_t box(uint64_t v) noexcept
{
    return v;
}
inline uint64_t box(float v) noexcept
{
    return std::bit_cast<uint32_t>(v);
}
inline uint64_t box(double v) noexcept
{
    return std::bit_cast<uint64_t>(v);
}

// Immediate readers for validated code.
inline uint32_t read_u32(const uint8_t*& p) noexcept
{
    uint32_t r = 0;
    unsigned shift = 0;
    uint8_t b;
    do
    {
        b = *p++;
        r |= static_cast<uint32_t>(b & 0x7f) << shift;
        shift += 7;
    } while (b & 0x80);
    return r;
}

inline int32_t read_s32(const uint8_t*& p) noexcept
{
    uint32_t r = 0;
    unsigned shift = 0;
    uint8_t b;
    do
    {
        b = *p++;
        r |= static_cast<uint32_t>(b & 0x7f) << shift;
        shift += 7;
    } while (b & 0x80);
    if (shift < 32 && (b & 0x40))
        r |= ~uint32_t{0} << shift;
    return static_cast<int32_t>(r);
}

inline int64_t read_s64(const uint8_t*& p) noexcept
{
    uint64_t r = 0;
    unsigned shift = 0;
    uint8_t b;
    do
    {
        b = *p++;
        r |= static_cast<uint64_t>(b & 0x7f) << shift;
        shift += 7;
    } while (b & 0x80);
    if (shift < 64 && (b & 0x40))
        r |= ~uint64_t{0} << shift;
    return static_cast<int64_t>(r);
}

inline void skip_leb(const uint8_t*& p) noexcept
{
    while (*p++ & 0x80)
    {
    }
}

inline TrapKind fault_kind(Fault f) noexcept
{
    switch (f)
    {
    case Fault::divide_by_zero:
        return TrapKind::divide_by_zero;
    case Fault::integer_overflow:
        return TrapKind::integer_overflow;
    default:
        return TrapKind::invalid_conversion;
    }
}

// clang-format off
#define WPROBE_OPCODES(X) \
    X(0x00, unreachable) X(0x01, nop) X(0x02, block) X(0x03, loop) X(0x04, if) X(0x05, else) \
    X(0x0b, end) X(0x0c, br) X(0x0d, br_if) X(0x0e, br_table) X(0x0f, return) X(0x10, call) \
    X(0x11, call_indirect) X(0x1a, drop) X(0x1b, select) \
    X(0x20, local_get) X(0x21, local_set) X(0x22, local_tee) X(0x23, global_get) X(0x24, global_set) \
    X(0x28, i32_load) X(0x29, i64_load) X(0x2a, f32_load) X(0x2b, f64_load) \
    X(0x2c, i32_load8_s) X(0x2d, i32_load8_u) X(0x2e, i32_load16_s) X(0x2f, i32_load16_u) \
    X(0x30, i64_load8_s) X(0x31, i64_load8_u) X(0x32, i64_load16_s) X(0x33, i64_load16_u) \
    X(0x34, i64_load32_s) X(0x35, i64_load32_u) \
    X(0x36, i32_store) X(0x37, i64_store) X(0x38, f32_store) X(0x39, f64_store) \
    X(0x3a, i32_store8) X(0x3b, i32_store16) X(0x3c, i64_store8) X(0x3d, i64_store16) X(0x3e, i64_store32) \
    X(0x3f, memory_size) X(0x40, memory_grow) \
    X(0x41, i32_const) X(0x42, i64_const) X(0x43, f32_const) X(0x44, f64_const) \
    X(0x45, i32_eqz) X(0x46, i32_eq) X(0x47, i32_ne) X(0x48, i32_lt_s) X(0x49, i32_lt_u) \
    X(0x4a, i32_gt_s) X(0x4b, i32_gt_u) X(0x4c, i32_le_s) X(0x4d, i32_le_u) X(0x4e, i32_ge_s) X(0x4f, i32_ge_u) \
    X(0x50, i64_eqz) X(0x51, i64_eq) X(0x52, i64_ne) X(0x53, i64_lt_s) X(0x54, i64_lt_u) \
    X(0x55, i64_gt_s) X(0x56, i64_gt_u) X(0x57, i64_le_s) X(0x58, i64_le_u) X(0x59, i64_ge_s) X(0x5a, i64_ge_u) \
    X(0x5b, f32_eq) X(0x5c, f32_ne) X(0x5d, f32_lt) X(0x5e, f32_gt) X(0x5f, f32_le) X(0x60, f32_ge) \
    X(0x61, f64_eq) X(0x62, f64_ne) X(0x63, f64_lt) X(0x64, f64_gt) X(0x65, f64_le) X(0x66, f64_ge) \
    X(0x67, i32_clz) X(0x68, i32_ctz) X(0x69, i32_popcnt) X(0x6a, i32_add) X(0x6b, i32_sub) \
    X(0x6c, i32_mul) X(0x6d, i32_div_s) X(0x6e, i32_div_u) X(0x6f, i32_rem_s) X(0x70, i32_rem_u) \
    X(0x71, i32_and) X(0x72, i32_or) X(0x73, i32_xor) X(0x74, i32_shl) X(0x75, i32_shr_s) \
    X(0x76, i32_shr_u) X(0x77, i32_rotl) X(0x78, i32_rotr) \
    X(0x79, i64_clz) X(0x7a, i64_ctz) X(0x7b, i64_popcnt) X(0x7c, i64_add) X(0x7d, i64_sub) \
    X(0x7e, i64_mul) X(0x7f, i64_div_s) X(0x80, i64_div_u) X(0x81, i64_rem_s) X(0x82, i64_rem_u) \
    X(0x83, i64_and) X(0x84, i64_or) X(0x85, i64_xor) X(0x86, i64_shl) X(0x87, i64_shr_s) \
    X(0x88, i64_shr_u) X(0x89, i64_rotl) X(0x8a, i64_rotr) \
    X(0x8b, f32_abs) X(0x8c, f32_neg) X(0x8d, f32_ceil) X(0x8e, f32_floor) X(0x8f, f32_trunc) \
    X(0x90, f32_nearest) X(0x91, f32_sqrt) X(0x92, f32_add) X(0x93, f32_sub) X(0x94, f32_mul) \
    X(0x95, f32_div) X(0x96, f32_min) X(0x97, f32_max) X(0x98, f32_copysign) \
    X(0x99, f64_abs) X(0x9a, f64_neg) X(0x9b, f64_ceil) X(0x9c, f64_floor) X(0x9d, f64_trunc) \
    X(0x9e, f64_nearest) X(0x9f, f64_sqrt) X(0xa0, f64_add) X(0xa1, f64_sub) X(0xa2, f64_mul) \
    X(0xa3, f64_div) X(0xa4, f64_min) X(0xa5, f64_max) X(0xa6, f64_copysign) \
    X(0xa7, i32_wrap_i64) X(0xa8, i32_trunc_f32_s) X(0xa9, i32_trunc_f32_u) X(0xaa, i32_trunc_f64_s) \
    X(0xab, i32_trunc_f64_u) X(0xac, i64_extend_i32_s) X(0xad, i64_extend_i32_u) \
    X(0xae, i64_trunc_f32_s) X(0xaf, i64_trunc_f32_u) X(0xb0, i64_trunc_f64_s) X(0xb1, i64_trunc_f64_u) \
    X(0xb2, f32_convert_i32_s) X(0xb3, f32_convert_i32_u) X(0xb4, f32_convert_i64_s) \
    X(0xb5, f32_convert_i64_u) X(0xb6, f32_demote_f64) X(0xb7, f64_convert_i32_s) \
    X(0xb8, f64_convert_i32_u) X(0xb9, f64_convert_i64_s) X(0xba, f64_convert_i64_u) \
    X(0xbb, f64_promote_f32) X(0xbc, i32_reinterpret_f32) X(0xbd, i64_reinterpret_f64) \
    X(0xbe, f32_reinterpret_i32) X(0xbf, f64_reinterpret_i64)
// clang-format on

[[gnu::noinline]] uint64_t* host_call(ExecState& S, uint32_t func_index, uint64_t* sp)
{
    const Module& m = S.module();
    const FuncType& type = m.func_type(func_index);
    const auto n = type.params.size();
    auto& args = S.host_args;
    args.clear();
    for (size_t i = 0; i < n; ++i)
        args.push_back(read_slot(sp[static_cast<ptrdiff_t>(i) - static_cast<ptrdiff_t>(n)], type.params[i]));
    sp -= n;
    auto results = S.instance->host_functions[func_index](*S.instance, args);
    if (results.size() != type.results.size())
        throw Error("host function " + m.imports[func_index].name + " returned wrong number of values");
    for (size_t i = 0; i < results.size(); ++i)
    {
        if (results[i].type != type.results[i])
            throw Error("host function " + m.imports[func_index].name + " returned wrong type");
        *sp++ = results[i].bits;
    }
    return sp;
}

[[gnu::noinline]] void grow_stack(ExecState& S, size_t needed)
{
    if (needed > (size_t{1} << 28))
        throw std::bad_alloc();
    S.stack.resize(std::max(needed, S.stack.size() * 2));
}

[[gnu::noinline, noreturn]] void invalid_opcode(uint8_t opcode)
{
    throw Error("invalid opcode " + std::to_string(opcode) + " reached during execution");
}

[[gnu::noinline]] bool grow_memory(Instance& inst, uint32_t delta, uint32_t& old_pages)
{
    old_pages = static_cast<uint32_t>(inst.memory.size() / page_size);
    const uint64_t pages = uint64_t{old_pages} + delta;
    if (pages > inst.memory_max_pages)
        return false;
    try
    {
        inst.memory.resize(pages * page_size);
    }
    catch (const std::bad_alloc&)
    {
        return false;
    }
    return true;
}

template <bool kProbes>
void run_loop(ExecState& S)
{
    void* normal[256];
    [[maybe_unused]] void* instrumented[256];
    for (auto& e : normal)
        e = &&L_invalid;
#define WPROBE_FILL(code, name) normal[code] = &&L_##name;
    WPROBE_OPCODES(WPROBE_FILL)
#undef WPROBE_FILL
    if constexpr (kProbes)
    {
        normal[op::probe] = &&L_probe;
        for (auto& e : instrumented)
            e = &&L_global_stub;
    }

    Instance& inst = *S.instance;
    std::vector<uint8_t>& mem = inst.memory;
    EngineData& D = *S.data;
    const Module& M = inst.module();
    const uint32_t num_imports = M.num_imported_funcs();
    FuncProbes* const probe_slots = D.modules.find(S.module_id)->second->funcs.data();

    uint64_t* stack_begin = S.stack.data();
    Frame* frame;
    const FuncDecl* func;
    const uint8_t* code;
    const uint8_t* ip;
    const Sidetable* st;
    uint64_t* locals;
    uint64_t* operands;
    uint64_t* sp;
    [[maybe_unused]] void* const* table = normal;
    TrapKind trap_kind = TrapKind::unreachable;
    uint32_t branch = 0;
    uint32_t callee = 0;
    uint32_t ret_pc = 0;

#define LOAD_FRAME()                                   \
    do                                                 \
    {                                                  \
        frame = &S.frames.back();                      \
        func = frame->func;                            \
        code = func->body.data();                      \
        st = &func->sidetable;                         \
        locals = stack_begin + frame->locals_base;     \
        operands = locals + func->local_types.size();  \
    } while (0)
#define SAVE()                                                  \
    do                                                          \
    {                                                           \
        frame->pc = static_cast<uint32_t>(ip - code);           \
        S.sp = static_cast<uint32_t>(sp - stack_begin);         \
    } while (0)
#define RELOAD_TABLE()                                                      \
    do                                                                      \
    {                                                                       \
        if constexpr (kProbes)                                              \
            table = (D.global || S.stepping || S.pause_requested) ? instrumented : normal; \
    } while (0)
#define DISPATCH()                  \
    do                              \
    {                               \
        if constexpr (kProbes)      \
            goto* table[*ip];       \
        else                        \
            goto* normal[*ip];      \
    } while (0)
#define TRAP(kind)           \
    do                       \
    {                        \
        trap_kind = (kind);  \
        goto do_trap;        \
    } while (0)

    LOAD_FRAME();
    ip = code + frame->pc;
    sp = stack_begin + S.sp;
    RELOAD_TABLE();
    if (S.skip_probes)
    {
        S.skip_probes = false;
        goto* normal[func->pristine_body[frame->pc]];
    }
    DISPATCH();

L_global_stub:
    if constexpr (kProbes)
    {
        if (S.stepping)
        {
            if (S.step_armed)
            {
                if (!S.pause_requested)
                    S.pause_reason = "step";
                S.pause_requested = true;
            }
            else
                S.step_armed = true;
        }
        if (ProbeSeq* g = D.global.get())
        {
            if (g->single_counter && !D.empty_probes)
                g->single_counter->increment();
            else
            {
                SAVE();
                fire_probes(S, *g, CodeLocation{S.module_id, frame->func_index, frame->pc});
                RELOAD_TABLE();
            }
        }
        if (S.pause_requested && *ip != op::probe)
            goto do_pause;
        goto* normal[*ip];
    }
    goto L_invalid;

L_probe:
    if constexpr (kProbes)
    {
        const auto pc = static_cast<uint32_t>(ip - code);
        ProbeSeq* seq = frame->probes->at[pc].get();
        if (seq->single_counter && !D.empty_probes)
        {
            seq->single_counter->increment();
            if (S.pause_requested)
                goto do_pause;
        }
        else
        {
            SAVE();
            fire_probes(S, *seq, CodeLocation{S.module_id, frame->func_index, pc});
            RELOAD_TABLE();
            if (S.pause_requested)
                goto do_pause;
        }
        goto* normal[func->pristine_body[pc]];
    }
    goto L_invalid;

do_pause:
    SAVE();
    S.pause_requested = false;
    S.skip_probes = true;
    S.status = ExecStatus::paused;
    return;

do_trap:
    SAVE();
    S.trap = Trap{trap_kind, CodeLocation{S.module_id, frame->func_index, frame->pc}};
    S.status = ExecStatus::trapped;
    return;

L_invalid:
    invalid_opcode(*ip);

L_unreachable:
    TRAP(TrapKind::unreachable);

L_nop:
    ++ip;
    DISPATCH();

L_block:
L_loop:
    ip += 2;
    DISPATCH();

L_if:
    if (u32(*--sp) != 0)
        ip += 2;
    else
        ip = code + st->targets[st->branch_index[ip - code]].target_pc;
    DISPATCH();

L_else:
    ip = code + st->targets[st->branch_index[ip - code]].target_pc;
    DISPATCH();

L_end:
    if (static_cast<size_t>(ip - code) + 1 == func->body.size())
        goto do_return;
    ++ip;
    DISPATCH();

L_br:
    branch = st->branch_index[ip - code];
    goto do_branch;

L_br_if:
    if (u32(*--sp) != 0)
    {
        branch = st->branch_index[ip - code];
        goto do_branch;
    }
    ++ip;
    skip_leb(ip);
    DISPATCH();

L_br_table:
{
    const uint8_t* p = ip + 1;
    const uint32_t n = read_u32(p);
    const uint32_t i = std::min(u32(*--sp), n);
    branch = st->branch_index[ip - code] + i;
    goto do_branch;
}

do_branch:
{
    const BranchTarget& t = st->targets[branch];
    if (t.target_pc == BranchTarget::return_target)
        goto do_return;
    uint64_t* dst = operands + t.height;
    if (t.arity != 0)
    {
        *dst = sp[-1];
        sp = dst + 1;
    }
    else
        sp = dst;
    ip = code + t.target_pc;
    DISPATCH();
}

L_return:
do_return:
{
    if (!M.types[func->type_index].results.empty())
    {
        locals[0] = sp[-1];
        sp = locals + 1;
    }
    else
        sp = locals;
    S.frames.pop_back();
    if (S.frames.empty())
    {
        S.sp = static_cast<uint32_t>(sp - stack_begin);
        S.status = ExecStatus::returned;
        return;
    }
    LOAD_FRAME();
    ip = code + frame->ret_pc;
    DISPATCH();
}

L_call:
{
    const uint8_t* p = ip + 1;
    callee = read_u32(p);
    ret_pc = static_cast<uint32_t>(p - code);
    goto do_call;
}

L_call_indirect:
{
    const uint8_t* p = ip + 1;
    const uint32_t type_index = read_u32(p);
    ++p;
    const uint32_t slot = u32(sp[-1]);
    if (slot >= inst.table.size() || inst.table[slot] == null_element)
        TRAP(TrapKind::undefined_element);
    callee = inst.table[slot];
    if (M.func_type(callee) != M.types[type_index])
        TRAP(TrapKind::indirect_call_mismatch);
    --sp;
    ret_pc = static_cast<uint32_t>(p - code);
    goto do_call;
}

do_call:
{
    if (callee < num_imports)
    {
        SAVE();
        try
        {
            sp = host_call(S, callee, sp);
        }
        catch (const TrapError& e)
        {
            TRAP(e.trap().kind);
        }
        RELOAD_TABLE();
        ip = code + ret_pc;
        DISPATCH();
    }
    if (S.frames.size() >= max_frames)
        TRAP(TrapKind::stack_exhausted);

    const FuncDecl& cf = M.funcs[callee - num_imports];
    const auto num_params = M.types[cf.type_index].params.size();
    const auto num_locals = cf.local_types.size();
    uint64_t* callee_locals = sp - num_params;
    const size_t needed =
        static_cast<size_t>(callee_locals - stack_begin) + num_locals + cf.sidetable.max_stack_height + 1;
    if (needed > S.stack.size())
    {
        const auto locals_index = callee_locals - stack_begin;
        grow_stack(S, needed);
        stack_begin = S.stack.data();
        callee_locals = stack_begin + locals_index;
        locals = stack_begin + frame->locals_base;
        operands = locals + func->local_types.size();
    }
    std::fill(callee_locals + num_params, callee_locals + num_locals, uint64_t{0});

    frame->pc = static_cast<uint32_t>(ip - code);
    frame->ret_pc = ret_pc;
    Frame& f = S.frames.emplace_back();
    f.func = &cf;
    f.func_index = callee;
    f.locals_base = static_cast<uint32_t>(callee_locals - stack_begin);
    f.frame_id = D.next_frame_id++;
    f.probes = probe_slots + (callee - num_imports);
    LOAD_FRAME();
    sp = operands;
    ip = code;
    DISPATCH();
}

L_drop:
    --sp;
    ++ip;
    DISPATCH();

L_select:
{
    const uint32_t c = u32(sp[-1]);
    sp -= 2;
    if (c == 0)
        sp[-1] = sp[0];
    ++ip;
    DISPATCH();
}

L_local_get:
{
    const uint8_t* p = ip + 1;
    *sp++ = locals[read_u32(p)];
    ip = p;
    DISPATCH();
}

L_local_set:
{
    const uint8_t* p = ip + 1;
    locals[read_u32(p)] = *--sp;
    ip = p;
    DISPATCH();
}

L_local_tee:
{
    const uint8_t* p = ip + 1;
    locals[read_u32(p)] = sp[-1];
    ip = p;
    DISPATCH();
}

L_global_get:
{
    const uint8_t* p = ip + 1;
    *sp++ = inst.globals[read_u32(p)];
    ip = p;
    DISPATCH();
}

L_global_set:
{
    const uint8_t* p = ip + 1;
    inst.globals[read_u32(p)] = *--sp;
    ip = p;
    DISPATCH();
}

#define LOAD(name, T, conv)                                        \
    L_##name:                                                      \
    {                                                              \
        const uint8_t* p = ip + 1;                                 \
        skip_leb(p);                                               \
        const uint64_t ea = uint64_t{u32(sp[-1])} + read_u32(p);   \
        if (ea + sizeof(T) > mem.size())                           \
            TRAP(TrapKind::out_of_bounds);                         \
        T v;                                                       \
        std::memcpy(&v, mem.data() + ea, sizeof(T));               \
        sp[-1] = box(conv(v));                                     \
        ip = p;                                                    \
        DISPATCH();                                                \
    }
#define AS(T) static_cast<T>
    LOAD(i32_load, uint32_t, AS(uint32_t))
    LOAD(i64_load, uint64_t, AS(uint64_t))
    LOAD(f32_load, uint32_t, AS(uint32_t))
    LOAD(f64_load, uint64_t, AS(uint64_t))
    LOAD(i32_load8_s, int8_t, AS(int32_t))
    LOAD(i32_load8_u, uint8_t, AS(uint32_t))
    LOAD(i32_load16_s, int16_t, AS(int32_t))
    LOAD(i32_load16_u, uint16_t, AS(uint32_t))
    LOAD(i64_load8_s, int8_t, AS(int64_t))
    LOAD(i64_load8_u, uint8_t, AS(uint64_t))
    LOAD(i64_load16_s, int16_t, AS(int64_t))
    LOAD(i64_load16_u, uint16_t, AS(uint64_t))
    LOAD(i64_load32_s, int32_t, AS(int64_t))
    LOAD(i64_load32_u, uint32_t, AS(uint64_t))
#undef LOAD

#define STORE(name, T)                                             \
    L_##name:                                                      \
    {                                                              \
        const uint8_t* p = ip + 1;                                 \
        skip_leb(p);                                               \
        const uint64_t ea = uint64_t{u32(sp[-2])} + read_u32(p);   \
        if (ea + sizeof(T) > mem.size())                           \
            TRAP(TrapKind::out_of_bounds);                         \
        const auto v = static_cast<T>(sp[-1]);                     \
        std::memcpy(mem.data() + ea, &v, sizeof(T));               \
        sp -= 2;                                                   \
        ip = p;                                                    \
        DISPATCH();                                                \
    }
    STORE(i32_store, uint32_t)
    STORE(i64_store, uint64_t)
    STORE(f32_store, uint32_t)
    STORE(f64_store, uint64_t)
    STORE(i32_store8, uint8_t)
    STORE(i32_store16, uint16_t)
    STORE(i64_store8, uint8_t)
    STORE(i64_store16, uint16_t)
    STORE(i64_store32, uint32_t)
#undef STORE

L_memory_size:
    *sp++ = box(static_cast<uint32_t>(mem.size() / page_size));
    ip += 2;
    DISPATCH();

L_memory_grow:
{
    uint32_t old_pages = 0;
    if (grow_memory(inst, u32(sp[-1]), old_pages))
        sp[-1] = box(old_pages);
    else
        sp[-1] = box(int32_t{-1});
    ip += 2;
    DISPATCH();
}

L_i32_const:
{
    const uint8_t* p = ip + 1;
    *sp++ = box(read_s32(p));
    ip = p;
    DISPATCH();
}

L_i64_const:
{
    const uint8_t* p = ip + 1;
    *sp++ = box(read_s64(p));
    ip = p;
    DISPATCH();
}

L_f32_const:
{
    uint32_t bits;
    std::memcpy(&bits, ip + 1, 4);
    *sp++ = bits;
    ip += 5;
    DISPATCH();
}

L_f64_const:
{
    uint64_t bits;
    std::memcpy(&bits, ip + 1, 8);
    *sp++ = bits;
    ip += 9;
    DISPATCH();
}

#define UNOP(name, get, expr)       \
    L_##name:                       \
    {                               \
        const auto a = get(sp[-1]); \
        sp[-1] = box(expr);         \
        ++ip;                       \
        DISPATCH();                 \
    }
#define BINOP(name, get, expr)      \
    L_##name:                       \
    {                               \
        const auto b = get(sp[-1]); \
        const auto a = get(sp[-2]); \
        --sp;                       \
        sp[-1] = box(expr);         \
        ++ip;                       \
        DISPATCH();                 \
    }
#define DIVOP(name, T, fn)                                  \
    L_##name:                                               \
    {                                                       \
        T r{};                                              \
        const Fault f = numeric::fn(static_cast<T>(sp[-2]), \
            static_cast<T>(sp[-1]), r);                     \
        if (f != Fault::none)                               \
            TRAP(fault_kind(f));                            \
        --sp;                                               \
        sp[-1] = box(r);                                    \
        ++ip;                                               \
        DISPATCH();                                         \
    }
#define TRUNC(name, I, get)                                 \
    L_##name:                                               \
    {                                                       \
        I r{};                                              \
        const Fault f = numeric::trunc<I>(get(sp[-1]), r);  \
        if (f != Fault::none)                               \
            TRAP(fault_kind(f));                            \
        sp[-1] = box(r);                                    \
        ++ip;                                               \
        DISPATCH();                                         \
    }

    UNOP(i32_eqz, u32, a == 0)
    BINOP(i32_eq, u32, a == b)
    BINOP(i32_ne, u32, a != b)
    BINOP(i32_lt_s, s32, a < b)
    BINOP(i32_lt_u, u32, a < b)
    BINOP(i32_gt_s, s32, a > b)
    BINOP(i32_gt_u, u32, a > b)
    BINOP(i32_le_s, s32, a <= b)
    BINOP(i32_le_u, u32, a <= b)
    BINOP(i32_ge_s, s32, a >= b)
    BINOP(i32_ge_u, u32, a >= b)

    UNOP(i64_eqz, u64, a == 0)
    BINOP(i64_eq, u64, a == b)
    BINOP(i64_ne, u64, a != b)
    BINOP(i64_lt_s, s64, a < b)
    BINOP(i64_lt_u, u64, a < b)
    BINOP(i64_gt_s, s64, a > b)
    BINOP(i64_gt_u, u64, a > b)
    BINOP(i64_le_s, s64, a <= b)
    BINOP(i64_le_u, u64, a <= b)
    BINOP(i64_ge_s, s64, a >= b)
    BINOP(i64_ge_u, u64, a >= b)

    BINOP(f32_eq, f32, a == b)
    BINOP(f32_ne, f32, a != b)
    BINOP(f32_lt, f32, a < b)
    BINOP(f32_gt, f32, a > b)
    BINOP(f32_le, f32, a <= b)
    BINOP(f32_ge, f32, a >= b)

    BINOP(f64_eq, f64, a == b)
    BINOP(f64_ne, f64, a != b)
    BINOP(f64_lt, f64, a < b)
    BINOP(f64_gt, f64, a > b)
    BINOP(f64_le, f64, a <= b)
    BINOP(f64_ge, f64, a >= b)

    UNOP(i32_clz, u32, static_cast<uint32_t>(std::countl_zero(a)))
    UNOP(i32_ctz, u32, static_cast<uint32_t>(std::countr_zero(a)))
    UNOP(i32_popcnt, u32, static_cast<uint32_t>(std::popcount(a)))
    BINOP(i32_add, u32, a + b)
    BINOP(i32_sub, u32, a - b)
    BINOP(i32_mul, u32, a * b)
    DIVOP(i32_div_s, uint32_t, div_s)
    DIVOP(i32_div_u, uint32_t, div_u)
    DIVOP(i32_rem_s, uint32_t, rem_s)
    DIVOP(i32_rem_u, uint32_t, rem_u)
    BINOP(i32_and, u32, a & b)
    BINOP(i32_or, u32, a | b)
    BINOP(i32_xor, u32, a ^ b)
    BINOP(i32_shl, u32, numeric::shl(a, b))
    BINOP(i32_shr_s, u32, numeric::shr_s(a, b))
    BINOP(i32_shr_u, u32, numeric::shr_u(a, b))
    BINOP(i32_rotl, u32, numeric::rotl(a, b))
    BINOP(i32_rotr, u32, numeric::rotr(a, b))

    UNOP(i64_clz, u64, static_cast<uint64_t>(std::countl_zero(a)))
    UNOP(i64_ctz, u64, static_cast<uint64_t>(std::countr_zero(a)))
    UNOP(i64_popcnt, u64, static_cast<uint64_t>(std::popcount(a)))
    BINOP(i64_add, u64, a + b)
    BINOP(i64_sub, u64, a - b)
    BINOP(i64_mul, u64, a * b)
    DIVOP(i64_div_s, uint64_t, div_s)
    DIVOP(i64_div_u, uint64_t, div_u)
    DIVOP(i64_rem_s, uint64_t, rem_s)
    DIVOP(i64_rem_u, uint64_t, rem_u)
    BINOP(i64_and, u64, a & b)
    BINOP(i64_or, u64, a | b)
    BINOP(i64_xor, u64, a ^ b)
    BINOP(i64_shl, u64, numeric::shl(a, b))
    BINOP(i64_shr_s, u64, numeric::shr_s(a, b))
    BINOP(i64_shr_u, u64, numeric::shr_u(a, b))
    BINOP(i64_rotl, u64, numeric::rotl(a, b))
    BINOP(i64_rotr, u64, numeric::rotr(a, b))

    UNOP(f32_abs, f32, numeric::fabs(a))
    UNOP(f32_neg, f32, numeric::fneg(a))
    UNOP(f32_ceil, f32, std::ceil(a))
    UNOP(f32_floor, f32, std::floor(a))
    UNOP(f32_trunc, f32, std::trunc(a))
    UNOP(f32_nearest, f32, numeric::fnearest(a))
    UNOP(f32_sqrt, f32, std::sqrt(a))
    BINOP(f32_add, f32, a + b)
    BINOP(f32_sub, f32, a - b)
    BINOP(f32_mul, f32, a * b)
    BINOP(f32_div, f32, a / b)
    BINOP(f32_min, f32, numeric::fmin(a, b))
    BINOP(f32_max, f32, numeric::fmax(a, b))
    BINOP(f32_copysign, f32, numeric::fcopysign(a, b))

    UNOP(f64_abs, f64, numeric::fabs(a))
    UNOP(f64_neg, f64, numeric::fneg(a))
    UNOP(f64_ceil, f64, std::ceil(a))
    UNOP(f64_floor, f64, std::floor(a))
    UNOP(f64_trunc, f64, std::trunc(a))
    UNOP(f64_nearest, f64, numeric::fnearest(a))
    UNOP(f64_sqrt, f64, std::sqrt(a))
    BINOP(f64_add, f64, a + b)
    BINOP(f64_sub, f64, a - b)
    BINOP(f64_mul, f64, a * b)
    BINOP(f64_div, f64, a / b)
    BINOP(f64_min, f64, numeric::fmin(a, b))
    BINOP(f64_max, f64, numeric::fmax(a, b))
    BINOP(f64_copysign, f64, numeric::fcopysign(a, b))

    UNOP(i32_wrap_i64, u64, static_cast<uint32_t>(a))
    TRUNC(i32_trunc_f32_s, int32_t, f32)
    TRUNC(i32_trunc_f32_u, uint32_t, f32)
    TRUNC(i32_trunc_f64_s, int32_t, f64)
    TRUNC(i32_trunc_f64_u, uint32_t, f64)
    UNOP(i64_extend_i32_s, s32, static_cast<int64_t>(a))
    UNOP(i64_extend_i32_u, u32, static_cast<uint64_t>(a))
    TRUNC(i64_trunc_f32_s, int64_t, f32)
    TRUNC(i64_trunc_f32_u, uint64_t, f32)
    TRUNC(i64_trunc_f64_s, int64_t, f64)
    TRUNC(i64_trunc_f64_u, uint64_t, f64)
    UNOP(f32_convert_i32_s, s32, static_cast<float>(a))
    UNOP(f32_convert_i32_u, u32, static_cast<float>(a))
    UNOP(f32_convert_i64_s, s64, static_cast<float>(a))
    UNOP(f32_convert_i64_u, u64, static_cast<float>(a))
    UNOP(f32_demote_f64, f64, static_cast<float>(a))
    UNOP(f64_convert_i32_s, s32, static_cast<double>(a))
    UNOP(f64_convert_i32_u, u32, static_cast<double>(a))
    UNOP(f64_convert_i64_s, s64, static_cast<double>(a))
    UNOP(f64_convert_i64_u, u64, static_cast<double>(a))
    UNOP(f64_promote_f32, f32, static_cast<double>(a))

// Reinterpretations are no-ops: slots already hold the raw bits.
L_i32_reinterpret_f32:
L_i64_reinterpret_f64:
L_f32_reinterpret_i32:
L_f64_reinterpret_i64:
    ++ip;
    DISPATCH();

#undef UNOP
#undef BINOP
#undef DIVOP
#undef TRUNC
#undef AS
#undef TRAP
#undef DISPATCH
#undef RELOAD_TABLE
#undef SAVE
#undef LOAD_FRAME
}
}  // namespace

Value read_slot(uint64_t bits, ValueType type) noexcept
{
    if (type == ValueType::i32 || type == ValueType::f32)
        bits &= 0xffffffffu;
    return Value{type, bits};
}

void interpret(ExecState& state, bool stripped)
{
    if (stripped)
        run_loop<false>(state);
    else
        run_loop<true>(state);
}
}  // namespace wprobe::detail
