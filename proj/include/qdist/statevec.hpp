// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file statevec.hpp
 * @brief Statevector distributed over 2^w ranks.
 *
 * Global amplitude i lives on rank i >> (N - w) at local offset
 * i mod 2^(N - w). Qubits below N - w are "suffix" (local) qubits and the
 * top w are "prefix" qubits, which select the rank. Every operator below is
 * collective: all ranks must call it with the same arguments.
 */

#pragma once

#include "qdist/local.hpp"
#include "qdist/transport.hpp"
#include "qdist/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace qdist {

class DistributedRegister {
public:
    /// Throws CapacityError unless num_qubits >= w.
    DistributedRegister(RankContext& ctx, int num_qubits);

    [[nodiscard]] int num_qubits() const { return num_qubits_; }
    /// Number of suffix qubits, log2 of the local array length.
    [[nodiscard]] int suffix_qubits() const { return suffix_; }
    [[nodiscard]] index_t local_size() const { return amps_.size(); }
    [[nodiscard]] int rank() const { return ctx_->rank(); }
    [[nodiscard]] RankContext& ctx() const { return *ctx_; }

    [[nodiscard]] index_t global_index(index_t j) const {
        return (static_cast<index_t>(rank()) << suffix_) | j;
    }

    AmpArray& amps() { return amps_; }
    const AmpArray& amps() const { return amps_; }
    AmpArray& buffer() { return buffer_; }

    /// Sets amplitude i to f(i) for every locally stored global index i.
    void init(const std::function<cplx(index_t)>& f);
    void init_basis_state(index_t i);

private:
    RankContext* ctx_;
    int num_qubits_;
    int suffix_;
    AmpArray amps_;
    AmpArray buffer_;
};

void dist_one_target(DistributedRegister& reg, const Matrix2& m, int t);

void dist_many_ctrl_one_target(DistributedRegister& reg, std::span<const int> ctrls, const Matrix2& m,
                               int t);

/// Swaps qubits t1 and t2. Moves amplitudes only; no arithmetic.
void dist_swap(DistributedRegister& reg, int t1, int t2);

/// Applies m to targets ts (bit q of m's index is qubit ts[q]), optionally
/// controlled. Prefix targets are first swapped into the lowest suffix
/// qubits that are neither targets nor controls, then swapped back.
/// Throws CapacityError when too few such suffix qubits exist.
void dist_many_target(DistributedRegister& reg, const MatrixN& m, std::span<const int> ts,
                      std::span<const int> ctrls = {});

/// Applies the tensor product of sigmas[q] on qubits ts[q]. Codes must be X, Y or Z.
void dist_pauli_tensor(DistributedRegister& reg, std::span<const Pauli> sigmas, std::span<const int> ts);

/// exp(i theta Z...Z) on ts: even-parity basis states gain e^{i theta}.
void dist_phase_gadget(DistributedRegister& reg, std::span<const int> ts, double theta);

/// exp(i theta P) for the Pauli tensor P of sigmas on ts.
void dist_pauli_gadget(DistributedRegister& reg, std::span<const Pauli> sigmas, std::span<const int> ts,
                       double theta);

/// Multiplies every amplitude by c.
void dist_scale(DistributedRegister& reg, cplx c);

/// Concatenates per-rank local arrays in ascending rank order.
std::vector<cplx> gather(const std::vector<AmpArray>& per_rank);

} // namespace qdist
