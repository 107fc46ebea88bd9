// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdist/local.hpp"

#include <algorithm>
#include <string>

namespace qdist {

ThreadPool& serial_pool() {
    static ThreadPool pool(1);
    return pool;
}

int num_qubits_of(const AmpArray& psi) {
    if (!is_pow2(psi.size()))
        throw ArgumentError("amplitude array length " + std::to_string(psi.size()) +
                            " is not a power of two");
    return log2_exact(psi.size());
}

void check_qubits(int num_qubits, std::initializer_list<std::span<const int>> lists) {
    index_t seen = 0;
    for (auto list : lists) {
        for (int q : list) {
            if (q < 0 || q >= num_qubits)
                throw ArgumentError("qubit " + std::to_string(q) + " is outside [0, " +
                                    std::to_string(num_qubits) + ")");
            if (get_bit(seen, q))
                throw ArgumentError("qubit " + std::to_string(q) + " appears more than once");
            seen = flip_bit(seen, q);
        }
    }
}

std::vector<int> sorted(std::span<const int> qubits) {
    std::vector<int> out(qubits.begin(), qubits.end());
    std::sort(out.begin(), out.end());
    return out;
}

void local_one_target(AmpArray& psi, const Matrix2& m, int t, ThreadPool& pool) {
    const int n = num_qubits_of(psi);
    const int ts[] = {t};
    check_qubits(n, {ts});

    pool.for_each(psi.size() / 2, [&](index_t k) {
        const index_t i0 = insert_bit(k, t, 0);
        const index_t i1 = flip_bit(i0, t);
        const amp a0 = psi[i0];
        const amp a1 = psi[i1];
        psi[i0] = m.m[0][0] * a0 + m.m[0][1] * a1;
        psi[i1] = m.m[1][0] * a0 + m.m[1][1] * a1;
    });
}

void local_many_ctrl_one_target(AmpArray& psi, std::span<const int> ctrls, const Matrix2& m, int t,
                                ThreadPool& pool) {
    const int n = num_qubits_of(psi);
    const int ts[] = {t};
    check_qubits(n, {ctrls, ts});

    std::vector<int> q(ctrls.begin(), ctrls.end());
    q.push_back(t);
    std::sort(q.begin(), q.end());

    pool.for_each(psi.size() >> q.size(), [&](index_t k) {
        const index_t i1 = insert_bits(k, q, 1);
        const index_t i0 = flip_bit(i1, t);
        const amp a0 = psi[i0];
        const amp a1 = psi[i1];
        psi[i0] = m.m[0][0] * a0 + m.m[0][1] * a1;
        psi[i1] = m.m[1][0] * a0 + m.m[1][1] * a1;
    });
}

void local_many_target(AmpArray& psi, const MatrixN& m, std::span<const int> ts, ThreadPool& pool) {
    local_many_ctrl_many_target(psi, {}, m, ts, pool);
}

void local_many_ctrl_many_target(AmpArray& psi, std::span<const int> ctrls, const MatrixN& m,
                                 std::span<const int> ts, ThreadPool& pool) {
    const int n = num_qubits_of(psi);
    check_qubits(n, {ctrls, ts});
    const int nt = static_cast<int>(ts.size());
    if (nt == 0)
        throw ArgumentError("many-target operator needs at least one target");
    if (m.n != nt)
        throw ArgumentError("a " + std::to_string(m.n) + "-qubit matrix cannot act on " +
                            std::to_string(nt) + " targets");

    std::vector<int> q(ts.begin(), ts.end());
    q.insert(q.end(), ctrls.begin(), ctrls.end());
    std::sort(q.begin(), q.end());
    const index_t ctrl_mask = bit_mask(ctrls);
    const index_t dim = m.dim();

    pool.for_blocks(psi.size() >> q.size(), [&](index_t begin, index_t end) {
        std::vector<amp> v(dim);
        for (index_t k = begin; k < end; ++k) {
            const index_t base = insert_bits(k, q, 0) | ctrl_mask;
            for (index_t j = 0; j < dim; ++j)
                v[j] = psi[set_bits(base, ts, j)];
            for (index_t j = 0; j < dim; ++j) {
                amp acc = m(j, 0) * v[0];
                for (index_t l = 1; l < dim; ++l)
                    acc += m(j, l) * v[l];
                psi[set_bits(base, ts, j)] = acc;
            }
        }
    });
}

void local_swap(AmpArray& psi, int t1, int t2, ThreadPool& pool) {
    const int n = num_qubits_of(psi);
    const int ts[] = {t1, t2};
    check_qubits(n, {ts});
    const int q[] = {std::min(t1, t2), std::max(t1, t2)};

    pool.for_each(psi.size() / 4, [&](index_t k) {
        const index_t i11 = insert_bits(k, q, 1);
        const index_t i10 = flip_bit(i11, t1);
        const index_t i01 = flip_bit(i11, t2);
        std::swap(psi[i01], psi[i10]);
    });
}

} // namespace qdist
