// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <type_traits>

/// Pure scalar semantics of the MVP numeric instructions.
namespace wprobe::numeric
{
/// Outcome of operations that can trap.
enum class Fault : uint8_t
{
    none,
    divide_by_zero,
    integer_overflow,
    invalid_conversion,
};

template <typename T>
constexpr T shl(T a, T b) noexcept
{
    return static_cast<T>(a << (b & (sizeof(T) * 8 - 1)));
}

template <typename T>
constexpr T shr_u(T a, T b) noexcept
{
    return static_cast<T>(a >> (b & (sizeof(T) * 8 - 1)));
}

template <typename T>
constexpr T shr_s(T a, T b) noexcept
{
    using S = std::make_signed_t<T>;
    return static_cast<T>(static_cast<S>(a) >> (b & (sizeof(T) * 8 - 1)));
}

template <typename T>
constexpr T rotl(T a, T b) noexcept
{
    return std::rotl(a, static_cast<int>(b & (sizeof(T) * 8 - 1)));
}

template <typename T>
constexpr T rotr(T a, T b) noexcept
{
    return std::rotr(a, static_cast<int>(b & (sizeof(T) * 8 - 1)));
}

template <typename T>
constexpr Fault div_u(T a, T b, T& out) noexcept
{
    if (b == 0)
        return Fault::divide_by_zero;
    out = a / b;
    return Fault::none;
}

template <typename T>
constexpr Fault rem_u(T a, T b, T& out) noexcept
{
    if (b == 0)
        return Fault::divide_by_zero;
    out = a % b;
    return Fault::none;
}

/// Signed division on the unsigned representation.
template <typename T>
constexpr Fault div_s(T a, T b, T& out) noexcept
{
    using S = std::make_signed_t<T>;
    const auto x = static_cast<S>(a);
    const auto y = static_cast<S>(b);
    if (y == 0)
        return Fault::divide_by_zero;
    if (x == std::numeric_limits<S>::min() && y == -1)
        return Fault::integer_overflow;
    out = static_cast<T>(x / y);
    return Fault::none;
}

template <typename T>
constexpr Fault rem_s(T a, T b, T& out) noexcept
{
    using S = std::make_signed_t<T>;
    const auto x = static_cast<S>(a);
    const auto y = static_cast<S>(b);
    if (y == 0)
        return Fault::divide_by_zero;
    out = (y == -1) ? 0 : static_cast<T>(x % y);
    return Fault::none;
}

template <typename F>
inline F fabs(F x) noexcept
{
    using U = std::conditional_t<sizeof(F) == 4, uint32_t, uint64_t>;
    constexpr U sign = U{1} << (sizeof(F) * 8 - 1);
    return std::bit_cast<F>(static_cast<U>(std::bit_cast<U>(x) & ~sign));
}

template <typename F>
inline F fneg(F x) noexcept
{
    using U = std::conditional_t<sizeof(F) == 4, uint32_t, uint64_t>;
    constexpr U sign = U{1} << (sizeof(F) * 8 - 1);
    return std::bit_cast<F>(static_cast<U>(std::bit_cast<U>(x) ^ sign));
}

template <typename F>
inline F fcopysign(F a, F b) noexcept
{
    using U = std::conditional_t<sizeof(F) == 4, uint32_t, uint64_t>;
    constexpr U sign = U{1} << (sizeof(F) * 8 - 1);
    return std::bit_cast<F>(
        static_cast<U>((std::bit_cast<U>(a) & ~sign) | (std::bit_cast<U>(b) & sign)));
}

template <typename F>
inline F canonical_nan() noexcept
{
    return std::numeric_limits<F>::quiet_NaN();
}

template <typename F>
inline F fmin(F a, F b) noexcept
{
    if (std::isnan(a) || std::isnan(b))
        return canonical_nan<F>();
    if (a == 0 && b == 0)
        return std::signbit(a) ? a : b;
    return a < b ? a : b;
}

template <typename F>
inline F fmax(F a, F b) noexcept
{
    if (std::isnan(a) || std::isnan(b))
        return canonical_nan<F>();
    if (a == 0 && b == 0)
        return std::signbit(a) ? b : a;
    return a > b ? a : b;
}

/// Round to nearest, ties to even.
template <typename F>
inline F fnearest(F x) noexcept
{
    return std::nearbyint(x);
}

/// Float to integer truncation with the Wasm trapping rules.
template <typename I, typename F>
inline Fault trunc(F x, I& out) noexcept
{
    if (std::isnan(x))
        return Fault::invalid_conversion;
    const F t = std::trunc(x);
    constexpr int bits = sizeof(I) * 8;
    if constexpr (std::is_signed_v<I>)
    {
        const F lower = -std::ldexp(F{1}, bits - 1);
        if (!(t >= lower && t < -lower))
            return Fault::integer_overflow;
    }
    else
    {
        const F upper = std::ldexp(F{1}, bits);
        if (!(t > F{-1} && t < upper))
            return Fault::integer_overflow;
    }
    out = static_cast<I>(t);
    return Fault::none;
}
}  // namespace wprobe::numeric
