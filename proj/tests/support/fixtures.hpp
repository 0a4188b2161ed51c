// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <wprobe/binary.hpp>
#include <wprobe/validator.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace wprobe::test
{
inline std::filesystem::path fixture_dir()
{
    return WPROBE_FIXTURE_DIR;
}

inline std::vector<uint8_t> fixture_bytes(const std::string& name)
{
    return read_file(fixture_dir() / (name + ".wasm"));
}

inline Module load_fixture(const std::string& name)
{
    auto m = parse_module(fixture_bytes(name));
    validate_or_throw(m);
    return m;
}

/// Every .wasm fixture, sorted by name.
inline std::vector<std::string> fixture_names()
{
    std::vector<std::string> names;
    for (const auto& e : std::filesystem::directory_iterator{fixture_dir()})
        if (e.path().extension() == ".wasm")
            names.push_back(e.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

struct ListedInstruction
{
    uint32_t pc;
    std::string mnemonic;
};

/// Instruction listings from wasm-objdump, keyed by absolute function index,
/// with pcs rebased to the first instruction of each body.
inline std::map<uint32_t, std::vector<ListedInstruction>> objdump_listing(const std::string& name)
{
    std::ifstream in{fixture_dir() / (name + ".objdump")};
    std::map<uint32_t, std::vector<ListedInstruction>> out;
    std::string line;
    int64_t func = -1;
    uint32_t base = 0;
    bool first = false;
    while (std::getline(in, line))
    {
        if (const auto f = line.find(" func["); f != std::string::npos && line[0] != ' ')
        {
            func = std::stoll(line.substr(f + 6));
            first = true;
            out[static_cast<uint32_t>(func)];
            continue;
        }
        const auto bar = line.find('|');
        if (func < 0 || bar == std::string::npos)
            continue;
        std::istringstream text{line.substr(bar + 1)};
        std::string mnemonic;
        text >> mnemonic;
        if (mnemonic.empty() || mnemonic.rfind("local[", 0) == 0)
            continue;
        const auto offset = static_cast<uint32_t>(std::stoul(line.substr(0, line.find(':')), nullptr, 16));
        if (first)
        {
            base = offset;
            first = false;
        }
        out[static_cast<uint32_t>(func)].push_back({offset - base, mnemonic});
    }
    return out;
}

/// Lines of expected_results.txt: fixture name -> wasm-interp output.
inline std::map<std::string, std::string> expected_results()
{
    std::ifstream in{fixture_dir() / "expected_results.txt"};
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line))
    {
        const auto tab = line.find('\t');
        if (tab != std::string::npos)
            out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}
}  // namespace wprobe::test
