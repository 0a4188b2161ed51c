// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace wprobe::leb128
{
template <std::integral T>
struct Decoded
{
    T value;
    uint32_t length;
};

/// Strict LEB128 decoding of `T` from [p, end). Returns nullopt on truncated
/// input, on encodings longer than ceil(bits / 7) bytes, and when unused bits
/// of the final byte are not a proper zero (or sign) extension.
template <std::integral T>
constexpr std::optional<Decoded<T>> decode(const uint8_t* p, const uint8_t* end) noexcept
{
    using U = std::make_unsigned_t<T>;
    constexpr unsigned bits = std::numeric_limits<U>::digits;
    constexpr unsigned max_bytes = (bits + 6) / 7;

    U result = 0;
    unsigned shift = 0;
    for (uint32_t i = 0; i < max_bytes; ++i)
    {
        if (p + i >= end)
            return std::nullopt;
        const uint8_t byte = p[i];
        result |= static_cast<U>(static_cast<U>(byte & 0x7f) << shift);
        shift += 7;
        if ((byte & 0x80) == 0)
        {
            if (i == max_bytes - 1)
            {
                // Only the low (bits - 7 * (max_bytes - 1)) bits are payload.
                const unsigned payload = bits - 7 * (max_bytes - 1);
                const uint8_t rest = static_cast<uint8_t>(byte >> payload) & (0x7f >> payload);
                if constexpr (std::is_signed_v<T>)
                {
                    const bool negative = (byte >> (payload - 1)) & 1;
                    const uint8_t expected = negative ? (0x7f >> payload) : 0;
                    if (rest != expected)
                        return std::nullopt;
                }
                else if (rest != 0)
                    return std::nullopt;
            }
            else if constexpr (std::is_signed_v<T>)
            {
                if (shift < bits && (byte & 0x40))
                    result |= static_cast<U>(~U{0} << shift);
            }
            return Decoded<T>{static_cast<T>(result), i + 1};
        }
    }
    return std::nullopt;
}

template <std::unsigned_integral T>
void encode(std::vector<uint8_t>& out, T value)
{
    do
    {
        uint8_t byte = value & 0x7f;
        value >>= 7;
        if (value != 0)
            byte |= 0x80;
        out.push_back(byte);
    } while (value != 0);
}

template <std::signed_integral T>
void encode(std::vector<uint8_t>& out, T value)
{
    bool more = true;
    while (more)
    {
        uint8_t byte = value & 0x7f;
        value >>= 7;  // arithmetic shift
        if ((value == 0 && (byte & 0x40) == 0) || (value == -1 && (byte & 0x40) != 0))
            more = false;
        else
            byte |= 0x80;
        out.push_back(byte);
    }
}
}  // namespace wprobe::leb128
