// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "qdist/types.hpp"

namespace qdist {

/// a * i^k, computed by swapping and negating components.
[[nodiscard]] inline amp times_i_pow(const amp& a, int k) {
    switch (k & 3) {
    case 0: return a;
    case 1: return amp(-a.imag(), a.real());
    case 2: return amp(-a.real(), -a.imag());
    default: return amp(a.imag(), -a.real());
    }
}

} // namespace qdist
