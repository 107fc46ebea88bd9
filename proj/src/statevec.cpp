// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdist/statevec.hpp"

#include "pauli_util.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qdist {

DistributedRegister::DistributedRegister(RankContext& ctx, int num_qubits)
    : ctx_(&ctx), num_qubits_(num_qubits), suffix_(num_qubits - ctx.world_exp()) {
    if (num_qubits < 0 || num_qubits > kMaxIndexBits)
        throw ArgumentError("register size " + std::to_string(num_qubits) + " is out of range");
    if (suffix_ < 0)
        throw CapacityError("a " + std::to_string(num_qubits) + "-qubit register cannot be split over " +
                            std::to_string(ctx.world_size()) + " ranks");
    amps_.assign(pow2(suffix_), amp{});
    buffer_.assign(pow2(suffix_), amp{});
}

void DistributedRegister::init(const std::function<cplx(index_t)>& f) {
    for (index_t j = 0; j < amps_.size(); ++j)
        amps_[j] = f(global_index(j));
}

void DistributedRegister::init_basis_state(index_t i) {
    if (i >= pow2(num_qubits_))
        throw ArgumentError("basis state " + std::to_string(i) + " is out of range");
    std::fill(amps_.begin(), amps_.end(), amp{});
    if ((i >> suffix_) == static_cast<index_t>(rank()))
        amps_[i & (local_size() - 1)] = 1.0;
}

namespace {

struct Split {
    std::vector<int> prefix; // as rank bits
    std::vector<int> suffix;
};

Split split_qubits(std::span<const int> qubits, int suffix) {
    Split s;
    for (int q : qubits) {
        if (q >= suffix)
            s.prefix.push_back(q - suffix);
        else
            s.suffix.push_back(q);
    }
    return s;
}

// Prefix-target one-target update; the caller has established the step.
void one_target_prefix(DistributedRegister& reg, const Matrix2& m, int t) {
    RankContext& ctx = reg.ctx();
    const int q = t - reg.suffix_qubits();
    const int r = reg.rank();
    const int pair = static_cast<int>(flip_bit(r, q));
    AmpArray& psi = reg.amps();
    AmpArray& phi = reg.buffer();

    ctx.exchange(psi, 0, phi, 0, reg.local_size(), pair, Paradigm::FullToBuffer);

    const int b = get_bit(r, q);
    const cplx m_same = m.m[b][b];
    const cplx m_other = m.m[b][!b];
    ctx.pool().for_each(reg.local_size(), [&](index_t j) { psi[j] = m_same * psi[j] + m_other * phi[j]; });
    ctx.note_writes(reg.local_size());
}

} // namespace

void dist_one_target(DistributedRegister& reg, const Matrix2& m, int t) {
    RankContext::Step step(reg.ctx());
    const int ts[] = {t};
    check_qubits(reg.num_qubits(), {ts});

    if (t < reg.suffix_qubits()) {
        local_one_target(reg.amps(), m, t, reg.ctx().pool());
        reg.ctx().note_writes(reg.local_size());
        return;
    }
    one_target_prefix(reg, m, t);
}

void dist_many_ctrl_one_target(DistributedRegister& reg, std::span<const int> ctrls, const Matrix2& m,
                               int t) {
    RankContext::Step step(reg.ctx());
    const int ts[] = {t};
    check_qubits(reg.num_qubits(), {ctrls, ts});

    RankContext& ctx = reg.ctx();
    const int lam = reg.suffix_qubits();
    const int r = reg.rank();
    const Split c = split_qubits(ctrls, lam);

    if (!all_bits_one(static_cast<index_t>(r), c.prefix))
        return;

    if (t < lam) {
        local_many_ctrl_one_target(reg.amps(), c.suffix, m, t, ctx.pool());
        ctx.note_writes(reg.local_size() >> c.suffix.size());
        return;
    }
    if (c.suffix.empty()) {
        one_target_prefix(reg, m, t);
        return;
    }

    // Only amplitudes satisfying the suffix controls are packed and exchanged.
    const std::vector<int> cs = sorted(c.suffix);
    const index_t len = reg.local_size() >> cs.size();
    const int q = t - lam;
    const int pair = static_cast<int>(flip_bit(r, q));
    AmpArray& psi = reg.amps();
    AmpArray& phi = reg.buffer();

    ctx.pool().for_each(len, [&](index_t k) { phi[k] = psi[insert_bits(k, cs, 1)]; });
    ctx.exchange(phi, 0, phi, len, len, pair, Paradigm::Packed);

    const int b = get_bit(r, q);
    const cplx m_same = m.m[b][b];
    const cplx m_other = m.m[b][!b];
    ctx.pool().for_each(len, [&](index_t k) {
        const index_t j = insert_bits(k, cs, 1);
        psi[j] = m_same * psi[j] + m_other * phi[k + len];
    });
    ctx.note_writes(2 * len);
}

void dist_swap(DistributedRegister& reg, int t1, int t2) {
    RankContext::Step step(reg.ctx());
    const int ts[] = {t1, t2};
    check_qubits(reg.num_qubits(), {ts});
    if (t1 > t2)
        std::swap(t1, t2);

    RankContext& ctx = reg.ctx();
    const int lam = reg.suffix_qubits();
    const int r = reg.rank();
    AmpArray& psi = reg.amps();
    AmpArray& phi = reg.buffer();
    const index_t size = reg.local_size();

    if (t2 < lam) {
        local_swap(psi, t1, t2, ctx.pool());
        ctx.note_writes(size / 2);
        return;
    }

    if (t1 >= lam) {
        // Both prefix: ranks whose two bits differ trade whole arrays.
        const int q1 = t1 - lam;
        const int q2 = t2 - lam;
        if (get_bit(r, q1) == get_bit(r, q2))
            return;
        const int qs[] = {q1, q2};
        const int pair = static_cast<int>(flip_bits(r, qs));
        ctx.exchange(psi, 0, phi, 0, size, pair, Paradigm::FullSwap);
        std::swap(psi, phi);
        ctx.note_writes(size);
        return;
    }

    // Split: the half of local amplitudes with bit t1 unequal to the rank's
    // t2 bit is traded with the pair's matching half.
    const int q2 = t2 - lam;
    const int b = !get_bit(r, q2);
    const int pair = static_cast<int>(flip_bit(r, q2));
    const index_t half = size / 2;

    ctx.pool().for_each(half, [&](index_t k) { phi[k] = psi[insert_bit(k, t1, b)]; });
    ctx.exchange(phi, 0, phi, half, half, pair, Paradigm::HalfSwap);
    ctx.pool().for_each(half, [&](index_t k) { psi[insert_bit(k, t1, b)] = phi[k + half]; });
    ctx.note_writes(2 * half);
}

void dist_many_target(DistributedRegister& reg, const MatrixN& m, std::span<const int> ts,
                      std::span<const int> ctrls) {
    RankContext::Step step(reg.ctx());
    check_qubits(reg.num_qubits(), {ctrls, ts});
    if (ts.empty())
        throw ArgumentError("many-target operator needs at least one target");
    if (m.n != static_cast<int>(ts.size()))
        throw ArgumentError("a " + std::to_string(m.n) + "-qubit matrix cannot act on " +
                            std::to_string(ts.size()) + " targets");

    RankContext& ctx = reg.ctx();
    const int lam = reg.suffix_qubits();
    const Split c = split_qubits(ctrls, lam);
    const int n = static_cast<int>(ts.size());
    if (n + static_cast<int>(c.suffix.size()) > lam)
        throw CapacityError(std::to_string(n) + " targets and " + std::to_string(c.suffix.size()) +
                            " local controls exceed the " + std::to_string(lam) +
                            " local qubits of each rank");

    // Destination for each prefix target: the lowest suffix qubit that is
    // neither a target nor a control.
    std::vector<int> local_ts(ts.begin(), ts.end());
    index_t used = bit_mask(ts) | bit_mask(c.suffix);
    int free_q = 0;
    std::vector<int> moved;
    for (int i = 0; i < n; ++i) {
        if (ts[i] < lam)
            continue;
        while (get_bit(used, free_q))
            ++free_q;
        local_ts[i] = free_q;
        used = flip_bit(used, free_q);
        moved.push_back(i);
    }

    if (!all_bits_one(static_cast<index_t>(reg.rank()), c.prefix)) {
        ctx.skip_steps(2 * moved.size());
        return;
    }

    for (int i : moved)
        dist_swap(reg, local_ts[i], ts[i]);
    local_many_ctrl_many_target(reg.amps(), c.suffix, m, local_ts, ctx.pool());
    ctx.note_writes(reg.local_size() >> c.suffix.size());
    for (auto it = moved.rbegin(); it != moved.rend(); ++it)
        dist_swap(reg, local_ts[*it], ts[*it]);
}

namespace {

struct PauliMasks {
    int y_count = 0;
    index_t pair_flip = 0;        // rank bits flipped by prefix X/Y targets
    index_t xy_suffix = 0;        // suffix X/Y targets
    std::vector<int> xy_suffix_list;
    index_t yz = 0;               // global Y/Z targets
};

PauliMasks pauli_masks(const DistributedRegister& reg, std::span<const Pauli> sigmas,
                       std::span<const int> ts) {
    if (sigmas.size() != ts.size())
        throw ArgumentError("Pauli codes and targets differ in length");
    check_qubits(reg.num_qubits(), {ts});
    const int lam = reg.suffix_qubits();
    PauliMasks pm;
    for (std::size_t q = 0; q < ts.size(); ++q) {
        const Pauli s = sigmas[q];
        const int t = ts[q];
        if (s == Pauli::I)
            throw ArgumentError("identity codes must be omitted from a Pauli tensor");
        if (s == Pauli::Y)
            ++pm.y_count;
        if (s == Pauli::Y || s == Pauli::Z)
            pm.yz = flip_bit(pm.yz, t);
        if (s == Pauli::X || s == Pauli::Y) {
            if (t >= lam) {
                pm.pair_flip = flip_bit(pm.pair_flip, t - lam);
            } else {
                pm.xy_suffix = flip_bit(pm.xy_suffix, t);
                pm.xy_suffix_list.push_back(t);
            }
        }
    }
    std::sort(pm.xy_suffix_list.begin(), pm.xy_suffix_list.end());
    return pm;
}

// Iterates each pair {j, j ^ xy_suffix} once, calling f(j, j').
template <class F>
void for_each_pauli_pair(ThreadPool& pool, index_t size, const std::vector<int>& xy, F&& f) {
    const index_t mask = bit_mask(xy);
    const int top = xy.back();
    pool.for_each(size / 2, [&](index_t k) {
        const index_t j = insert_bit(k, top, 0);
        f(j, j ^ mask);
    });
}

} // namespace

void dist_pauli_tensor(DistributedRegister& reg, std::span<const Pauli> sigmas, std::span<const int> ts) {
    RankContext::Step step(reg.ctx());
    const PauliMasks pm = pauli_masks(reg, sigmas, ts);
    RankContext& ctx = reg.ctx();
    const int lam = reg.suffix_qubits();
    const index_t r = static_cast<index_t>(reg.rank());
    const index_t pair = r ^ pm.pair_flip;
    AmpArray& psi = reg.amps();
    AmpArray& phi = reg.buffer();
    const index_t size = reg.local_size();

    // beta(i) = i^{#Y} (-1)^{parity(i & yz)}, stored as a power of i.
    auto beta = [&](index_t i) { return pm.y_count + 2 * mask_parity(i & pm.yz); };

    if (pair == r) {
        if (pm.xy_suffix_list.empty()) {
            ctx.pool().for_each(size, [&](index_t j) { psi[j] = times_i_pow(psi[j], beta((r << lam) | j)); });
        } else {
            for_each_pauli_pair(ctx.pool(), size, pm.xy_suffix_list, [&](index_t j, index_t jp) {
                const amp a = psi[j];
                psi[j] = times_i_pow(psi[jp], beta((r << lam) | jp));
                psi[jp] = times_i_pow(a, beta((r << lam) | j));
            });
        }
        ctx.note_writes(size);
        return;
    }

    ctx.exchange(psi, 0, phi, 0, size, static_cast<int>(pair), Paradigm::FullToBuffer);
    ctx.pool().for_each(size, [&](index_t j) {
        const index_t jp = j ^ pm.xy_suffix;
        psi[j] = times_i_pow(phi[jp], beta((pair << lam) | jp));
    });
    ctx.note_writes(size);
}

void dist_phase_gadget(DistributedRegister& reg, std::span<const int> ts, double theta) {
    RankContext::Step step(reg.ctx());
    check_qubits(reg.num_qubits(), {ts});
    const index_t mask = bit_mask(ts);
    const cplx even = std::polar(1.0, theta);
    const cplx odd = std::conj(even);
    AmpArray& psi = reg.amps();
    reg.ctx().pool().for_each(reg.local_size(), [&](index_t j) {
        psi[j] *= mask_parity(reg.global_index(j) & mask) ? odd : even;
    });
    reg.ctx().note_writes(reg.local_size());
}

void dist_pauli_gadget(DistributedRegister& reg, std::span<const Pauli> sigmas, std::span<const int> ts,
                       double theta) {
    RankContext::Step step(reg.ctx());
    const PauliMasks pm = pauli_masks(reg, sigmas, ts);
    RankContext& ctx = reg.ctx();
    const int lam = reg.suffix_qubits();
    const index_t r = static_cast<index_t>(reg.rank());
    const index_t pair = r ^ pm.pair_flip;
    AmpArray& psi = reg.amps();
    AmpArray& phi = reg.buffer();
    const index_t size = reg.local_size();
    const double a = std::cos(theta);
    const double b = std::sin(theta);

    // i * beta(i) as a power of i.
    auto ibeta = [&](index_t i) { return 1 + pm.y_count + 2 * mask_parity(i & pm.yz); };

    if (pair == r) {
        if (pm.xy_suffix_list.empty()) {
            ctx.pool().for_each(size, [&](index_t j) {
                psi[j] = a * psi[j] + b * times_i_pow(psi[j], ibeta((r << lam) | j));
            });
        } else {
            for_each_pauli_pair(ctx.pool(), size, pm.xy_suffix_list, [&](index_t j, index_t jp) {
                const amp x = psi[j];
                const amp y = psi[jp];
                psi[j] = a * x + b * times_i_pow(y, ibeta((r << lam) | jp));
                psi[jp] = a * y + b * times_i_pow(x, ibeta((r << lam) | j));
            });
        }
        ctx.note_writes(size);
        return;
    }

    ctx.exchange(psi, 0, phi, 0, size, static_cast<int>(pair), Paradigm::FullToBuffer);
    ctx.pool().for_each(size, [&](index_t j) {
        const index_t jp = j ^ pm.xy_suffix;
        psi[j] = a * psi[j] + b * times_i_pow(phi[jp], ibeta((pair << lam) | jp));
    });
    ctx.note_writes(size);
}

void dist_scale(DistributedRegister& reg, cplx c) {
    RankContext::Step step(reg.ctx());
    AmpArray& psi = reg.amps();
    reg.ctx().pool().for_each(reg.local_size(), [&](index_t j) { psi[j] *= c; });
    reg.ctx().note_writes(reg.local_size());
}

std::vector<cplx> gather(const std::vector<AmpArray>& per_rank) {
    std::vector<cplx> out;
    for (const auto& part : per_rank)
        for (const amp& a : part)
            out.push_back(to_cplx(a));
    return out;
}

} // namespace qdist
