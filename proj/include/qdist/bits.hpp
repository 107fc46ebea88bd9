// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file bits.hpp
 * @brief Bit manipulation of basis-state indices.
 *
 * Indices are 64-bit unsigned; at most 62 bits are used, which covers the
 * Choi-vector of a 31-qubit density matrix.
 */

#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <span>

namespace qdist {

using index_t = std::uint64_t;

inline constexpr int kMaxIndexBits = 62;

[[nodiscard]] constexpr index_t pow2(int k) noexcept {
    return index_t{1} << k;
}

[[nodiscard]] constexpr int get_bit(index_t n, int t) noexcept {
    return static_cast<int>((n >> t) & 1u);
}

[[nodiscard]] constexpr index_t flip_bit(index_t n, int t) noexcept {
    return n ^ (index_t{1} << t);
}

[[nodiscard]] constexpr index_t set_bit(index_t n, int t, int b) noexcept {
    return (n & ~(index_t{1} << t)) | (static_cast<index_t>(b) << t);
}

/// Shifts bits at positions >= t up by one and places b at t.
[[nodiscard]] constexpr index_t insert_bit(index_t n, int t, int b) noexcept {
    const index_t low = n & ((index_t{1} << t) - 1);
    const index_t high = (n >> t) << (t + 1);
    return high | (static_cast<index_t>(b) << t) | low;
}

/// Positions must be strictly increasing.
[[nodiscard]] inline index_t insert_bits(index_t n, std::span<const int> ts, int b) noexcept {
    for (std::size_t q = 0; q < ts.size(); ++q) {
        assert(q == 0 || ts[q - 1] < ts[q]);
        n = insert_bit(n, ts[q], b);
    }
    return n;
}

[[nodiscard]] constexpr index_t bit_mask(std::span<const int> ts) noexcept {
    index_t m = 0;
    for (int t : ts)
        m |= index_t{1} << t;
    return m;
}

[[nodiscard]] constexpr index_t flip_bits(index_t n, std::span<const int> ts) noexcept {
    return n ^ bit_mask(ts);
}

/// Bit ts[q] of the result is bit q of v; other bits are untouched.
[[nodiscard]] constexpr index_t set_bits(index_t n, std::span<const int> ts, index_t v) noexcept {
    for (std::size_t q = 0; q < ts.size(); ++q)
        n = set_bit(n, ts[q], get_bit(v, static_cast<int>(q)));
    return n;
}

[[nodiscard]] constexpr bool all_bits_one(index_t n, std::span<const int> ts) noexcept {
    const index_t m = bit_mask(ts);
    return (n & m) == m;
}

[[nodiscard]] constexpr int mask_parity(index_t n) noexcept {
    return std::popcount(n) & 1;
}

[[nodiscard]] constexpr int log2_exact(index_t n) noexcept {
    return std::countr_zero(n);
}

[[nodiscard]] constexpr bool is_pow2(index_t n) noexcept {
    return std::has_single_bit(n);
}

} // namespace qdist
