// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/debugger.hpp"
#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace wprobe
{
namespace
{
constexpr const char* help_text =
    "break F P        set a breakpoint at function F, pc P\n"
    "delete F P       remove a breakpoint\n"
    "continue | c     resume\n"
    "step | s         execute one instruction\n"
    "next | n         step over calls\n"
    "stack | bt       show frames, innermost first\n"
    "locals [L]       locals of frame L (0 = innermost)\n"
    "operands [L]     operand stack of frame L, top first\n"
    "set local I V    assign a local of the innermost frame\n"
    "set operand I V  assign an operand (0 = top) of the innermost frame\n"
    "dis F            disassemble function F\n"
    "watch F I        pause when local I of function F changes (experimental)\n"
    "unwatch ID       remove a watchpoint\n"
    "info             list breakpoints\n"
    "quit             detach and run to completion\n";

void print_values(std::ostream& out, const std::vector<Value>& values)
{
    for (size_t i = 0; i < values.size(); ++i)
        out << "  [" << i << "] " << to_string(values[i]) << '\n';
    if (values.empty())
        out << "  (none)\n";
}

class ConsoleSession final : public DebugSession
{
public:
    ConsoleSession(std::istream& in, std::ostream& out) : in_{in}, out_{out} {}

    void paused(Debugger& dbg, Execution&) override
    {
        if (detached_)
            return;
        const auto loc = dbg.location();
        const auto top = dbg.stack().front();
        out_ << "paused (" << dbg.pause_reason() << ") at f" << loc.func_index << '+' << loc.pc << ": "
             << top.instruction << '\n';
        std::string line;
        while (!dbg.resume_requested())
        {
            out_ << "(wprobe) " << std::flush;
            if (!std::getline(in_, line))
            {
                detach(dbg);
                return;
            }
            try
            {
                execute(dbg, line);
            }
            catch (const Error& e)
            {
                out_ << "error: " << e.what() << '\n';
            }
        }
    }

    void finished(Debugger&) override
    {
        if (!detached_)
            out_ << "program finished\n";
    }

private:
    void detach(Debugger& dbg)
    {
        detached_ = true;
        for (const auto& loc : dbg.breakpoints())
            dbg.remove_breakpoint(loc.func_index, loc.pc);
        for (uint32_t id : watches_)
            dbg.unwatch(id);
        dbg.resume();
    }

    static uint32_t number(std::istringstream& args, const char* what)
    {
        long long v = -1;
        if (!(args >> v) || v < 0 || v > UINT32_MAX)
            throw Error(std::string("expected ") + what);
        return static_cast<uint32_t>(v);
    }

    static uint32_t optional_number(std::istringstream& args)
    {
        long long v = 0;
        if (!(args >> v))
            return 0;
        if (v < 0 || v > UINT32_MAX)
            throw Error("expected a frame level");
        return static_cast<uint32_t>(v);
    }

    void execute(Debugger& dbg, const std::string& line)
    {
        std::istringstream args{line};
        std::string cmd;
        if (!(args >> cmd))
            return;
        if (cmd == "help" || cmd == "h")
            out_ << help_text;
        else if (cmd == "break" || cmd == "b")
        {
            const uint32_t f = number(args, "a function index");
            const uint32_t pc = number(args, "a pc");
            dbg.set_breakpoint(f, pc);
            out_ << "breakpoint at f" << f << '+' << pc << '\n';
        }
        else if (cmd == "delete" || cmd == "d")
        {
            const uint32_t f = number(args, "a function index");
            const uint32_t pc = number(args, "a pc");
            out_ << (dbg.remove_breakpoint(f, pc) ? "deleted\n" : "no breakpoint there\n");
        }
        else if (cmd == "continue" || cmd == "c")
            dbg.resume();
        else if (cmd == "step" || cmd == "s")
            dbg.step();
        else if (cmd == "next" || cmd == "n")
            dbg.step_over();
        else if (cmd == "stack" || cmd == "bt")
        {
            for (const auto& fr : dbg.stack())
                out_ << "  #" << fr.depth << " f" << fr.func << '+' << fr.pc << "  " << fr.instruction << '\n';
        }
        else if (cmd == "locals")
            print_values(out_, dbg.locals(optional_number(args)));
        else if (cmd == "operands")
            print_values(out_, dbg.operands(optional_number(args)));
        else if (cmd == "set")
        {
            std::string what, text;
            args >> what;
            const uint32_t index = number(args, "an index");
            args >> text;
            const bool local = what == "local";
            if (!local && what != "operand")
                throw Error("usage: set local|operand I VALUE");
            const auto current = local ? dbg.locals() : dbg.operands();
            if (index >= current.size())
                throw IndexOutOfRange("index " + std::to_string(index) + " out of range");
            const auto v = parse_value(text, current[index].type);
            if (!v)
                throw Error("cannot parse value '" + text + "'");
            if (local)
                dbg.set_local(index, *v);
            else
                dbg.set_operand(index, *v);
            out_ << what << ' ' << index << " = " << to_string(*v) << '\n';
        }
        else if (cmd == "dis")
        {
            const uint32_t f = number(args, "a function index");
            const auto here = dbg.paused() ? std::optional{dbg.location()} : std::nullopt;
            const auto bps = dbg.breakpoints();
            for (const auto& insn : dbg.disassemble(f))
            {
                const CodeLocation loc{dbg.module()->id, f, insn.pc};
                const bool bp = std::find(bps.begin(), bps.end(), loc) != bps.end();
                out_ << (here == loc ? "=>" : "  ") << (bp ? '*' : ' ') << ' ' << insn.pc << "\t"
                     << format_instruction(insn) << '\n';
            }
        }
        else if (cmd == "watch")
        {
            const uint32_t f = number(args, "a function index");
            const uint32_t i = number(args, "a local index");
            const uint32_t id = dbg.watch_local(f, i);
            watches_.push_back(id);
            out_ << "watchpoint " << id << " on f" << f << " local " << i << '\n';
        }
        else if (cmd == "unwatch")
            out_ << (dbg.unwatch(number(args, "a watchpoint id")) ? "removed\n" : "no such watchpoint\n");
        else if (cmd == "info")
        {
            for (const auto& loc : dbg.breakpoints())
                out_ << "  breakpoint f" << loc.func_index << '+' << loc.pc << '\n';
        }
        else if (cmd == "quit" || cmd == "q")
            detach(dbg);
        else
            out_ << "unknown command '" << cmd << "'; try help\n";
    }

    std::istream& in_;
    std::ostream& out_;
    bool detached_ = false;
    std::vector<uint32_t> watches_;
};
}  // namespace

std::shared_ptr<DebugSession> make_console_session(std::istream& in, std::ostream& out)
{
    return std::make_shared<ConsoleSession>(in, out);
}
}  // namespace wprobe
