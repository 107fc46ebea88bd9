// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdist/density.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>
#include <bit>
#include <string>

namespace qdist {

namespace {

std::mutex warn_mu;
std::function<void(std::string_view)> warn_handler = [](std::string_view msg) {
    std::cerr << "qdist: warning: " << msg << '\n';
};

void warn_if_outside(std::string_view channel, double p, double hi) {
    if (p >= 0 && p <= hi)
        return;
    std::ostringstream msg;
    msg << channel << " probability " << p << " lies outside [0, " << hi << "]";
    std::lock_guard lock(warn_mu);
    if (warn_handler)
        warn_handler(msg.str());
}

int checked_size(int num_qubits, const RankContext& ctx) {
    if (num_qubits < ctx.world_exp())
        throw CapacityError("a " + std::to_string(num_qubits) + "-qubit density matrix cannot be split over " +
                            std::to_string(ctx.world_size()) + " ranks");
    return num_qubits;
}

std::vector<int> shifted(std::span<const int> qs, int by) {
    std::vector<int> out(qs.begin(), qs.end());
    for (int& q : out)
        q += by;
    return out;
}

int count_y(std::span<const Pauli> sigmas) {
    return static_cast<int>(std::count(sigmas.begin(), sigmas.end(), Pauli::Y));
}

// Rank bit holding column qubit t, for t with t + N in the prefix.
int column_rank_bit(const ChoiRegister& rho, int t) {
    return t + rho.num_qubits() - rho.vec().suffix_qubits();
}

bool column_is_local(const ChoiRegister& rho, int t) {
    return t + rho.num_qubits() < rho.vec().suffix_qubits();
}

} // namespace

void set_warning_handler(std::function<void(std::string_view)> handler) {
    std::lock_guard lock(warn_mu);
    warn_handler = std::move(handler);
}

ChoiRegister::ChoiRegister(RankContext& ctx, int num_qubits)
    : num_qubits_(checked_size(num_qubits, ctx)), inner_(ctx, 2 * num_qubits) {}

ChoiRegister::ChoiRegister(RankContext& ctx, int num_qubits, Unchecked)
    : num_qubits_(num_qubits), inner_(ctx, 2 * num_qubits) {}

void ChoiRegister::init(const std::function<cplx(index_t, index_t)>& f) {
    const index_t row_mask = pow2(num_qubits_) - 1;
    inner_.init([&](index_t i) { return f(i & row_mask, i >> num_qubits_); });
}

void ChoiRegister::init_pure(std::span<const cplx> psi) {
    if (psi.size() != pow2(num_qubits_))
        throw ArgumentError("statevector length " + std::to_string(psi.size()) + " does not match " +
                            std::to_string(num_qubits_) + " qubits");
    init([&](index_t k, index_t l) { return psi[k] * std::conj(psi[l]); });
}

void ChoiRegister::init_basis_state(index_t i) {
    if (i >= pow2(num_qubits_))
        throw ArgumentError("basis state " + std::to_string(i) + " is out of range");
    inner_.init_basis_state(i + (i << num_qubits_));
}

void dm_one_target(ChoiRegister& rho, std::span<const int> ctrls, const Matrix2& m, int t) {
    RankContext::Step step(rho.ctx());
    const int ts[] = {t};
    check_qubits(rho.num_qubits(), {ctrls, ts});
    const int n = rho.num_qubits();
    Matrix2 mc;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            mc.m[r][c] = std::conj(m.m[r][c]);

    dist_many_ctrl_one_target(rho.vec(), ctrls, m, t);
    dist_many_ctrl_one_target(rho.vec(), shifted(ctrls, n), mc, t + n);
}

void dm_many_target_unitary(ChoiRegister& rho, const MatrixN& m, std::span<const int> ts,
                            std::span<const int> ctrls) {
    RankContext::Step step(rho.ctx());
    check_qubits(rho.num_qubits(), {ctrls, ts});
    const int n = rho.num_qubits();
    const int lam = rho.vec().suffix_qubits();
    const std::vector<int> cols = shifted(ts, n);
    const std::vector<int> col_ctrls = shifted(ctrls, n);
    const auto local_ctrls = std::count_if(col_ctrls.begin(), col_ctrls.end(), [&](int c) { return c < lam; });
    if (static_cast<int>(ts.size() + local_ctrls) > lam)
        throw CapacityError(std::to_string(ts.size()) + " targets exceed the " + std::to_string(lam) +
                            " local qubits of each rank");

    dist_many_target(rho.vec(), m, ts, ctrls);
    dist_many_target(rho.vec(), m.conjugated(), cols, col_ctrls);
}

void dm_swap(ChoiRegister& rho, int t1, int t2) {
    RankContext::Step step(rho.ctx());
    const int ts[] = {t1, t2};
    check_qubits(rho.num_qubits(), {ts});
    const int n = rho.num_qubits();
    dist_swap(rho.vec(), t1, t2);
    dist_swap(rho.vec(), t1 + n, t2 + n);
}

void dm_pauli_tensor(ChoiRegister& rho, std::span<const Pauli> sigmas, std::span<const int> ts) {
    RankContext::Step step(rho.ctx());
    check_qubits(rho.num_qubits(), {ts});
    // Row and column tensors act on disjoint qubits, so one tensor over both
    // costs a single exchange.
    std::vector<Pauli> both(sigmas.begin(), sigmas.end());
    both.insert(both.end(), sigmas.begin(), sigmas.end());
    std::vector<int> targets(ts.begin(), ts.end());
    for (int t : ts)
        targets.push_back(t + rho.num_qubits());
    dist_pauli_tensor(rho.vec(), both, targets);
    if (count_y(sigmas) % 2)
        dist_scale(rho.vec(), -1.0);
}

void dm_phase_gadget(ChoiRegister& rho, std::span<const int> ts, double theta) {
    RankContext::Step step(rho.ctx());
    check_qubits(rho.num_qubits(), {ts});
    dist_phase_gadget(rho.vec(), ts, theta);
    dist_phase_gadget(rho.vec(), shifted(ts, rho.num_qubits()), -theta);
}

void dm_pauli_gadget(ChoiRegister& rho, std::span<const Pauli> sigmas, std::span<const int> ts,
                     double theta) {
    RankContext::Step step(rho.ctx());
    check_qubits(rho.num_qubits(), {ts});
    dist_pauli_gadget(rho.vec(), sigmas, ts, theta);
    const double conj_theta = count_y(sigmas) % 2 ? theta : -theta;
    dist_pauli_gadget(rho.vec(), sigmas, shifted(ts, rho.num_qubits()), conj_theta);
}

MatrixN kraus_superoperator(std::span<const MatrixN> ks, ThreadPool& pool) {
    if (ks.empty())
        throw ArgumentError("a Kraus map needs at least one operator");
    const int n = ks.front().n;
    if (n < 1)
        throw ArgumentError("Kraus operators must act on at least one qubit");
    for (const auto& k : ks)
        if (k.n != n || k.elems.size() != pow2(2 * n))
            throw ArgumentError("Kraus operators differ in dimension");

    const index_t d = pow2(n);
    MatrixN s(2 * n);
    const index_t rows = s.dim();

    auto fill_row = [&](index_t row) {
        const index_t i = row >> n;
        const index_t k = row & (d - 1);
        for (index_t col = 0; col < rows; ++col) {
            const index_t j = col >> n;
            const index_t l = col & (d - 1);
            cplx acc = 0;
            for (const auto& km : ks)
                acc += std::conj(km(i, j)) * km(k, l);
            s(row, col) = acc;
        }
    };

    // Worth spreading over threads only for large sets.
    constexpr index_t kParallelThreshold = index_t{1} << 16;
    if (ks.size() * rows * rows > kParallelThreshold)
        pool.for_each(rows, fill_row);
    else
        for (index_t row = 0; row < rows; ++row)
            fill_row(row);
    return s;
}

void kraus_map(ChoiRegister& rho, std::span<const MatrixN> ks, std::span<const int> ts) {
    RankContext::Step step(rho.ctx());
    check_qubits(rho.num_qubits(), {ts});
    if (ks.empty() || ks.front().n != static_cast<int>(ts.size()))
        throw ArgumentError("Kraus operators do not match " + std::to_string(ts.size()) + " targets");
    const int lam = rho.vec().suffix_qubits();
    if (2 * static_cast<int>(ts.size()) > lam)
        throw CapacityError("a " + std::to_string(ts.size()) + "-qubit Kraus map needs " +
                            std::to_string(2 * ts.size()) + " local qubits but each rank has " +
                            std::to_string(lam));

    const MatrixN s = kraus_superoperator(ks, rho.ctx().pool());
    std::vector<int> targets(ts.begin(), ts.end());
    for (int t : ts)
        targets.push_back(t + rho.num_qubits());
    dist_many_target(rho.vec(), s, targets);
}

void dephase_one(ChoiRegister& rho, int t, double p) {
    RankContext::Step step(rho.ctx());
    const int ts[] = {t};
    check_qubits(rho.num_qubits(), {ts});
    warn_if_outside("one-qubit dephasing", p, 0.5);

    DistributedRegister& reg = rho.vec();
    AmpArray& amps = reg.amps();
    ThreadPool& pool = rho.ctx().pool();
    const double c = 1 - 2 * p;
    const int tc = t + rho.num_qubits();

    if (!column_is_local(rho, t)) {
        const int b = get_bit(reg.rank(), column_rank_bit(rho, t));
        pool.for_each(reg.local_size() / 2, [&](index_t k) { amps[insert_bit(k, t, !b)] *= c; });
    } else {
        pool.for_each(reg.local_size() / 4, [&](index_t k) {
            amps[insert_bit(insert_bit(k, t, 1), tc, 0)] *= c;
            amps[insert_bit(insert_bit(k, t, 0), tc, 1)] *= c;
        });
    }
    rho.ctx().note_writes(reg.local_size() / 2);
}

void dephase_two(ChoiRegister& rho, int t1, int t2, double p) {
    RankContext::Step step(rho.ctx());
    const int ts[] = {t1, t2};
    check_qubits(rho.num_qubits(), {ts});
    warn_if_outside("two-qubit dephasing", p, 0.75);

    DistributedRegister& reg = rho.vec();
    AmpArray& amps = reg.amps();
    const int n = rho.num_qubits();
    const double factors[] = {1.0, 1 - 4 * p / 3};
    reg.ctx().pool().for_each(reg.local_size(), [&](index_t j) {
        const index_t i = reg.global_index(j);
        const bool differs = (get_bit(i, t1) != get_bit(i, t1 + n)) || (get_bit(i, t2) != get_bit(i, t2 + n));
        amps[j] *= factors[differs];
    });
    rho.ctx().note_writes(reg.local_size());
}

void depolarise_one(ChoiRegister& rho, int t, double p) {
    RankContext::Step step(rho.ctx());
    const int ts[] = {t};
    check_qubits(rho.num_qubits(), {ts});
    warn_if_outside("one-qubit depolarising", p, 0.75);

    DistributedRegister& reg = rho.vec();
    RankContext& ctx = rho.ctx();
    AmpArray& amps = reg.amps();
    AmpArray& buf = reg.buffer();
    const double c1 = 2 * p / 3;
    const double c2 = 1 - 2 * p / 3;
    const double c3 = 1 - 4 * p / 3;
    const int tc = t + rho.num_qubits();

    if (column_is_local(rho, t)) {
        const int q[] = {t, tc};
        ctx.pool().for_each(reg.local_size() / 4, [&](index_t k) {
            const index_t j00 = insert_bits(k, q, 0);
            const index_t j01 = flip_bit(j00, t);
            const index_t j10 = flip_bit(j00, tc);
            const index_t j11 = flip_bit(j01, tc);
            const amp g = amps[j00];
            amps[j00] = c2 * g + c1 * amps[j11];
            amps[j01] *= c3;
            amps[j10] *= c3;
            amps[j11] = c1 * g + c2 * amps[j11];
        });
        ctx.note_writes(reg.local_size());
        return;
    }

    const int rb = column_rank_bit(rho, t);
    const int b = get_bit(reg.rank(), rb);
    const int pair = static_cast<int>(flip_bit(reg.rank(), rb));
    const index_t half = reg.local_size() / 2;

    ctx.pool().for_each(half, [&](index_t k) { buf[k] = amps[insert_bit(k, t, b)]; });
    ctx.exchange(buf, 0, buf, half, half, pair, Paradigm::Packed);
    ctx.pool().for_each(half, [&](index_t k) {
        amps[insert_bit(k, t, !b)] *= c3;
        const index_t j = insert_bit(k, t, b);
        amps[j] = c2 * amps[j] + c1 * buf[k + half];
    });
    ctx.note_writes(reg.local_size() + half);
}

void depolarise_two(ChoiRegister& rho, int t1, int t2, double p) {
    RankContext::Step step(rho.ctx());
    const int ts[] = {t1, t2};
    check_qubits(rho.num_qubits(), {ts});
    if (!(p >= 0 && p <= 15.0 / 16))
        throw ArgumentError("two-qubit depolarising probability " + std::to_string(p) +
                            " lies outside [0, 15/16]");
    if (t1 > t2)
        std::swap(t1, t2);

    DistributedRegister& reg = rho.vec();
    RankContext& ctx = rho.ctx();
    AmpArray& amps = reg.amps();
    AmpArray& buf = reg.buffer();
    const int n = rho.num_qubits();
    const index_t size = reg.local_size();

    // beta_i -> c1 beta_i + c2 (sum of the three partners flipped on {t1,t1+N},
    // {t2,t2+N} or both) when both principal pairs agree, else (1 + c3) beta_i.
    const double c1 = 1 - 4 * p / 5;
    const double c2 = 4 * p / 15;
    const double c3 = -16 * p / 15;
    const double factors[] = {1 + c3, 1.0};

    if (column_is_local(rho, t2)) {
        ctx.pool().for_each(size, [&](index_t j) {
            const bool same = get_bit(j, t1) == get_bit(j, t1 + n) && get_bit(j, t2) == get_bit(j, t2 + n);
            amps[j] *= factors[same];
        });
        const std::vector<int> q = sorted(std::vector<int>{t1, t2, t1 + n, t2 + n});
        const int f1[] = {t1, t1 + n};
        const int f2[] = {t2, t2 + n};
        const double self = c1 - c2;
        ctx.pool().for_each(size / 16, [&](index_t h) {
            const index_t j0 = insert_bits(h, q, 0);
            const index_t j1 = flip_bits(j0, f1);
            const index_t j2 = flip_bits(j0, f2);
            const index_t j3 = flip_bits(j1, f2);
            const amp kappa = amps[j0] + amps[j1] + amps[j2] + amps[j3];
            amps[j0] = self * amps[j0] + c2 * kappa;
            amps[j1] = self * amps[j1] + c2 * kappa;
            amps[j2] = self * amps[j2] + c2 * kappa;
            amps[j3] = self * amps[j3] + c2 * kappa;
        });
        ctx.note_writes(size + size / 4);
        return;
    }

    if (column_is_local(rho, t1)) {
        const int rb = column_rank_bit(rho, t2);
        const int b = get_bit(reg.rank(), rb);
        const int pair = static_cast<int>(flip_bit(reg.rank(), rb));
        ctx.pool().for_each(size, [&](index_t j) {
            const bool same = get_bit(j, t1) == get_bit(j, t1 + n) && get_bit(j, t2) == b;
            amps[j] *= factors[same];
        });

        // Pre-combine the two local amplitudes each pair partner needs.
        const int q[] = {t1, t2, t1 + n};
        const int f1[] = {t1, t1 + n};
        const index_t eighth = size / 8;
        auto index0 = [&](index_t k) { return set_bit(insert_bits(k, q, 0), t2, b); };
        ctx.pool().for_each(eighth, [&](index_t k) {
            const index_t j0 = index0(k);
            buf[k] = amps[j0] + amps[flip_bits(j0, f1)];
        });
        ctx.exchange(buf, 0, buf, eighth, eighth, pair, Paradigm::Packed);
        ctx.pool().for_each(eighth, [&](index_t k) {
            const index_t j0 = index0(k);
            const index_t j1 = flip_bits(j0, f1);
            const amp x = amps[j0];
            const amp y = amps[j1];
            const amp s = buf[k + eighth];
            amps[j0] = c1 * x + c2 * (y + s);
            amps[j1] = c1 * y + c2 * (x + s);
        });
        ctx.note_writes(size + eighth + size / 4);
        return;
    }

    // Both column qubits are prefix. Round one sums each amplitude with its
    // {t1,t1+N} partner; round two adds the partner's sum across {t2,t2+N}.
    const int rb1 = column_rank_bit(rho, t1);
    const int rb2 = column_rank_bit(rho, t2);
    const int b1 = get_bit(reg.rank(), rb1);
    const int b2 = get_bit(reg.rank(), rb2);
    const int pair1 = static_cast<int>(flip_bit(reg.rank(), rb1));
    const int pair2 = static_cast<int>(flip_bit(reg.rank(), rb2));
    ctx.pool().for_each(size, [&](index_t j) {
        const bool same = get_bit(j, t1) == b1 && get_bit(j, t2) == b2;
        amps[j] *= factors[same];
    });

    const int q[] = {t1, t2};
    const index_t quarter = size / 4;
    auto index = [&](index_t k) { return set_bit(set_bit(insert_bits(k, q, 0), t1, b1), t2, b2); };
    const double self = c1 - c2;

    ctx.pool().for_each(quarter, [&](index_t k) { buf[k] = amps[index(k)]; });
    ctx.exchange(buf, 0, buf, quarter, quarter, pair1, Paradigm::Packed);
    ctx.pool().for_each(quarter, [&](index_t k) {
        const index_t j = index(k);
        const amp s = amps[j] + buf[k + quarter];
        amps[j] = self * amps[j] + c2 * s;
        buf[k] = s;
    });
    ctx.exchange(buf, 0, buf, quarter, quarter, pair2, Paradigm::Packed);
    ctx.pool().for_each(quarter, [&](index_t k) { amps[index(k)] += c2 * buf[k + quarter]; });
    ctx.note_writes(size + 2 * quarter + 2 * quarter);
}

void damping(ChoiRegister& rho, int t, double p) {
    RankContext::Step step(rho.ctx());
    const int ts[] = {t};
    check_qubits(rho.num_qubits(), {ts});
    warn_if_outside("damping", p, 1.0);

    DistributedRegister& reg = rho.vec();
    RankContext& ctx = rho.ctx();
    AmpArray& amps = reg.amps();
    AmpArray& buf = reg.buffer();
    const double c1 = std::sqrt(1 - p);
    const double c2 = 1 - p;
    const int tc = t + rho.num_qubits();

    if (column_is_local(rho, t)) {
        const int q[] = {t, tc};
        ctx.pool().for_each(reg.local_size() / 4, [&](index_t k) {
            const index_t j00 = insert_bits(k, q, 0);
            const index_t j01 = flip_bit(j00, t);
            const index_t j10 = flip_bit(j00, tc);
            const index_t j11 = flip_bit(j01, tc);
            amps[j00] += p * amps[j11];
            amps[j01] *= c1;
            amps[j10] *= c1;
            amps[j11] *= c2;
        });
        ctx.note_writes(reg.local_size());
        return;
    }

    // Ranks whose column bit is 1 send their decaying half one way.
    const int rb = column_rank_bit(rho, t);
    const int b = get_bit(reg.rank(), rb);
    const int pair = static_cast<int>(flip_bit(reg.rank(), rb));
    const index_t half = reg.local_size() / 2;

    if (b == 1) {
        ctx.pool().for_each(half, [&](index_t k) {
            const index_t j = insert_bit(k, t, 1);
            buf[k] = amps[j];
            amps[j] *= c2;
        });
        ctx.send_async(buf, half, pair);
    }
    ctx.pool().for_each(half, [&](index_t k) { amps[insert_bit(k, t, !b)] *= c1; });
    if (b == 0) {
        ctx.receive(buf, half, pair);
        ctx.pool().for_each(half, [&](index_t k) { amps[insert_bit(k, t, 0)] += p * buf[k]; });
    }
    ctx.note_writes(reg.local_size());
}

namespace {

// Element of a Pauli matrix as a power of i, or -1 when zero.
int pauli_elem_pow(Pauli s, int row, int col) {
    switch (s) {
    case Pauli::I: return row == col ? 0 : -1;
    case Pauli::X: return row != col ? 0 : -1;
    case Pauli::Y: return row != col ? (row ? 1 : 3) : -1;
    case Pauli::Z: return row == col ? 2 * row : -1;
    }
    return -1;
}

const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

} // namespace

cplx pauli_string_expectation(const ChoiRegister& rho, const PauliString& h) {
    RankContext& ctx = rho.ctx();
    RankContext::Step step(ctx);
    const int n = rho.num_qubits();
    const std::size_t terms = h.coeffs.size();
    if (h.codes.size() != terms * static_cast<std::size_t>(n))
        throw ArgumentError("Pauli string has " + std::to_string(h.codes.size()) + " codes but " +
                            std::to_string(terms) + " terms of " + std::to_string(n) + " qubits need " +
                            std::to_string(terms * n));
    for (Pauli c : h.codes)
        if (static_cast<int>(c) < 0 || static_cast<int>(c) > 3)
            throw ArgumentError("invalid Pauli code");

    const DistributedRegister& reg = rho.vec();
    const AmpArray& amps = reg.amps();

    // Element (l, k) of the tensor product, where the Choi index holds column
    // bits above row bits. Exactly n integer multiplications per term.
    auto tensor_elem = [&](const Pauli* sigma, index_t i) {
        int pw = 0;
        bool zero = false;
        for (int q = 0; q < n; ++q) {
            const int e = pauli_elem_pow(sigma[q], get_bit(i, q + n), get_bit(i, q));
            zero |= e < 0;
            pw += e;
        }
        return zero ? cplx{} : kIPow[pw & 3];
    };

    const cplx local = ctx.pool().sum(reg.local_size(), [&](index_t j) {
        const index_t i = reg.global_index(j);
        cplx v = 0;
        for (std::size_t t = 0; t < terms; ++t)
            v += h.coeffs[t] * tensor_elem(h.codes.data() + t * n, i);
        return v * to_cplx(amps[j]);
    });
    return ctx.reduce_sum(local);
}

ChoiRegister partial_trace(ChoiRegister& rho, std::span<const int> ts, bool loose) {
    RankContext& ctx = rho.ctx();
    RankContext::Step step(ctx);
    const int n = rho.num_qubits();
    const int w = ctx.world_exp();
    check_qubits(n, {ts});
    const int nt = static_cast<int>(ts.size());
    if (nt == 0)
        throw ArgumentError("partial trace needs at least one qubit to trace out");
    const int bound = loose ? n - (w + 1) / 2 : n - w;
    if (nt > bound)
        throw CapacityError("cannot trace out " + std::to_string(nt) + " of " + std::to_string(n) +
                            " qubits over " + std::to_string(ctx.world_size()) + " ranks; at most " +
                            std::to_string(bound) + (loose ? " (N - ceil(w/2))" : " (N - w)") +
                            " are supported");

    DistributedRegister& reg = rho.vec();
    const int lam = reg.suffix_qubits();
    const int nq = 2 * n;

    // at[p]: register qubit currently held at position p.
    std::vector<int> at(nq);
    for (int p = 0; p < nq; ++p)
        at[p] = p;
    std::vector<int> rows(ts.begin(), ts.end());
    std::vector<int> cols = shifted(ts, n);

    index_t occupied = bit_mask(rows);
    for (int c : cols)
        if (c < lam)
            occupied = flip_bit(occupied, c);

    // Move prefix column targets, leftmost first, into the leftmost free
    // suffix positions.
    std::vector<std::size_t> order(nt);
    for (int q = 0; q < nt; ++q)
        order[q] = q;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cols[a] > cols[b]; });
    int dest = lam - 1;
    for (std::size_t q : order) {
        if (cols[q] < lam)
            continue;
        while (get_bit(occupied, dest))
            --dest;
        dist_swap(reg, dest, cols[q]);
        std::swap(at[dest], at[cols[q]]);
        occupied = flip_bit(occupied, dest);
        cols[q] = dest;
    }

    // Local reduction: out[i] = sum over v of rho at i with v woven into both
    // the row and column target positions.
    const int m = n - nt;
    ChoiRegister out = loose ? ChoiRegister(ctx, m, ChoiRegister::Unchecked{}) : ChoiRegister(ctx, m);
    std::vector<int> all = rows;
    all.insert(all.end(), cols.begin(), cols.end());
    const std::vector<int> s = sorted(all);
    const AmpArray& in = reg.amps();
    AmpArray& res = out.vec().amps();
    const index_t nv = pow2(nt);
    ctx.pool().for_each(res.size(), [&](index_t i) {
        const index_t g0 = insert_bits(i, s, 0);
        amp acc = in[set_bits(set_bits(g0, rows, 0), cols, 0)];
        for (index_t v = 1; v < nv; ++v)
            acc += in[set_bits(set_bits(g0, rows, v), cols, v)];
        res[i] = acc;
    });
    ctx.note_writes(res.size());

    // Restore ascending order of the surviving qubits with swaps on the
    // reduced register.
    const index_t traced = bit_mask(all);
    const index_t traced_orig = bit_mask(rows) | bit_mask(shifted(ts, n));
    std::vector<int> cur;
    for (int p = 0; p < nq; ++p) {
        if (get_bit(traced, p))
            continue;
        const int o = at[p];
        cur.push_back(std::popcount(~traced_orig & (pow2(o) - 1)));
    }
    for (int q = static_cast<int>(cur.size()) - 1; q >= 0; --q) {
        if (cur[q] == q)
            continue;
        const int p = static_cast<int>(std::find(cur.begin(), cur.end(), q) - cur.begin());
        dist_swap(out.vec(), q, p);
        std::swap(cur[q], cur[p]);
    }
    return out;
}

} // namespace qdist
