// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file density.hpp
 * @brief Density matrices stored as distributed Choi-vectors.
 *
 * Element rho(k, l) of an N-qubit density matrix is amplitude k + l * 2^N of
 * a 2N-qubit register, so qubit t of the row index is register qubit t and
 * qubit t of the column index is register qubit t + N. Requires N >= w.
 */

#pragma once

#include "qdist/statevec.hpp"

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace qdist {

class ChoiRegister {
public:
    /// Throws CapacityError unless num_qubits >= w.
    ChoiRegister(RankContext& ctx, int num_qubits);

    [[nodiscard]] int num_qubits() const { return num_qubits_; }
    [[nodiscard]] DistributedRegister& vec() { return inner_; }
    [[nodiscard]] const DistributedRegister& vec() const { return inner_; }
    [[nodiscard]] RankContext& ctx() const { return inner_.ctx(); }

    /// Sets rho(k, l) = f(k, l) for every locally stored element.
    void init(const std::function<cplx(index_t, index_t)>& f);
    /// rho = |psi><psi| for a full statevector psi of length 2^N.
    void init_pure(std::span<const cplx> psi);
    void init_basis_state(index_t i);

private:
    struct Unchecked {};
    ChoiRegister(RankContext& ctx, int num_qubits, Unchecked);
    friend ChoiRegister partial_trace(ChoiRegister&, std::span<const int>, bool);

    int num_qubits_;
    DistributedRegister inner_;
};

/// Called with a message when a channel probability lies outside its
/// physical range. The default handler writes to stderr.
void set_warning_handler(std::function<void(std::string_view)> handler);

void dm_one_target(ChoiRegister& rho, std::span<const int> ctrls, const Matrix2& m, int t);
void dm_many_target_unitary(ChoiRegister& rho, const MatrixN& m, std::span<const int> ts,
                            std::span<const int> ctrls = {});
void dm_swap(ChoiRegister& rho, int t1, int t2);
void dm_pauli_tensor(ChoiRegister& rho, std::span<const Pauli> sigmas, std::span<const int> ts);
void dm_phase_gadget(ChoiRegister& rho, std::span<const int> ts, double theta);
void dm_pauli_gadget(ChoiRegister& rho, std::span<const Pauli> sigmas, std::span<const int> ts,
                     double theta);

/// Applies rho -> sum_m K_m rho K_m^dagger on targets ts.
void kraus_map(ChoiRegister& rho, std::span<const MatrixN> ks, std::span<const int> ts);

/// Builds the 2n-qubit superoperator sum_m conj(K_m) (x) K_m; its low n bits
/// act on the row qubits and its high n bits on the column qubits.
MatrixN kraus_superoperator(std::span<const MatrixN> ks, ThreadPool& pool = serial_pool());

void dephase_one(ChoiRegister& rho, int t, double p);
void dephase_two(ChoiRegister& rho, int t1, int t2, double p);
void depolarise_one(ChoiRegister& rho, int t, double p);
/// Requires 0 <= p <= 15/16.
void depolarise_two(ChoiRegister& rho, int t1, int t2, double p);
void damping(ChoiRegister& rho, int t, double p);

/// Tr(H rho) for the weighted Pauli sum H. Collective; one scalar reduction.
cplx pauli_string_expectation(const ChoiRegister& rho, const PauliString& h);

/// Traces out qubits ts and returns the reduced register. The input is left
/// with its qubits permuted and should be discarded. By default at most
/// N - w qubits may be traced, so that the result can be distributed as a
/// density matrix again; loose raises the bound to N - ceil(w/2) and may
/// return a register with fewer qubits than w.
ChoiRegister partial_trace(ChoiRegister& rho, std::span<const int> ts, bool loose = false);

} // namespace qdist
