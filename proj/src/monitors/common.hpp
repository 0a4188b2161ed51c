// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wprobe/disassembler.hpp"
#include "wprobe/monitor.hpp"
#include "wprobe/probe.hpp"
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace wprobe::monitors
{
/// Per-function listings of a module's defined functions.
struct Listing
{
    struct Func
    {
        uint32_t index = 0;
        std::vector<Instruction> insns;
        /// pc -> position in insns, or -1.
        std::vector<int32_t> at;
    };
    std::vector<Func> funcs;

    explicit Listing(const Module& m)
    {
        for (const auto& f : m.funcs)
        {
            Func lf;
            lf.index = f.index;
            lf.insns = disassemble(f);
            lf.at.assign(f.pristine_body.size(), -1);
            for (size_t i = 0; i < lf.insns.size(); ++i)
                lf.at[lf.insns[i].pc] = static_cast<int32_t>(i);
            funcs.push_back(std::move(lf));
        }
    }
};

inline std::string percent(uint64_t part, uint64_t whole)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", whole ? 100.0 * double(part) / double(whole) : 0.0);
    return buf;
}

std::unique_ptr<Monitor> make_trace(std::ostream* out);
std::unique_ptr<Monitor> make_coverage();
std::unique_ptr<Monitor> make_loop();
std::unique_ptr<Monitor> make_hotness(std::string_view variant);
std::unique_ptr<Monitor> make_branch(std::string_view variant);
std::unique_ptr<Monitor> make_memory();
std::unique_ptr<Monitor> make_calls();
std::unique_ptr<Monitor> make_debugger(const MonitorEnv& env);
}  // namespace wprobe::monitors
