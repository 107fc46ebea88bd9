// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdist/types.hpp"

#include <atomic>
#include <mutex>
#include <vector>

namespace qdist {

MatrixN MatrixN::identity(int num_qubits) {
    MatrixN m(num_qubits);
    for (index_t d = 0; d < m.dim(); ++d)
        m(d, d) = 1;
    return m;
}

MatrixN MatrixN::from(const Matrix2& m2) {
    MatrixN m(1);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            m(r, c) = m2.m[r][c];
    return m;
}

MatrixN MatrixN::conjugated() const {
    MatrixN out = *this;
    for (cplx& e : out.elems)
        e = std::conj(e);
    return out;
}

namespace flops {

namespace {

// Each thread counts into its own slot; slots of exited threads are folded
// into retired_.
struct Registry {
    std::mutex mu;
    std::vector<const std::atomic<std::uint64_t>*> live;
    std::uint64_t retired = 0;
    std::uint64_t base = 0;
};

Registry& registry() {
    static Registry reg;
    return reg;
}

struct Slot {
    std::atomic<std::uint64_t> n{0};
    Slot() {
        std::lock_guard lock(registry().mu);
        registry().live.push_back(&n);
    }
    ~Slot() {
        auto& reg = registry();
        std::lock_guard lock(reg.mu);
        reg.retired += n.load(std::memory_order_relaxed);
        std::erase(reg.live, &n);
    }
};

std::uint64_t total_locked(Registry& reg) {
    std::uint64_t t = reg.retired;
    for (auto* c : reg.live)
        t += c->load(std::memory_order_relaxed);
    return t;
}

} // namespace

namespace detail {

void bump() {
    thread_local Slot slot;
    slot.n.fetch_add(1, std::memory_order_relaxed);
}

} // namespace detail

std::uint64_t count() {
    auto& reg = registry();
    std::lock_guard lock(reg.mu);
    return total_locked(reg) - reg.base;
}

void reset() {
    auto& reg = registry();
    std::lock_guard lock(reg.mu);
    reg.base = total_locked(reg);
}

bool enabled() {
#ifdef QDIST_COUNT_FLOPS
    return true;
#else
    return false;
#endif
}

} // namespace flops

} // namespace qdist
