// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file local.hpp
 * @brief Single-array statevector kernels. The distributed operators call
 * these whenever all involved qubits lie within a rank's local array.
 */

#pragma once

#include "qdist/parallel.hpp"
#include "qdist/types.hpp"

#include <span>
#include <vector>

namespace qdist {

/// A pool with no workers, for callers that want serial execution.
ThreadPool& serial_pool();

/// Number of qubits addressed by an array of 2^k amplitudes.
int num_qubits_of(const AmpArray& psi);

/// Throws ArgumentError unless every qubit lies in [0, num_qubits) and no
/// qubit appears twice across all given lists.
void check_qubits(int num_qubits, std::initializer_list<std::span<const int>> lists);

std::vector<int> sorted(std::span<const int> qubits);

void local_one_target(AmpArray& psi, const Matrix2& m, int t, ThreadPool& pool = serial_pool());

void local_many_ctrl_one_target(AmpArray& psi, std::span<const int> ctrls, const Matrix2& m, int t,
                                ThreadPool& pool = serial_pool());

/// Applies m to targets ts; bit q of m's row and column index is qubit ts[q].
void local_many_target(AmpArray& psi, const MatrixN& m, std::span<const int> ts,
                       ThreadPool& pool = serial_pool());

/// As local_many_target, acting only where every control bit is 1.
void local_many_ctrl_many_target(AmpArray& psi, std::span<const int> ctrls, const MatrixN& m,
                                 std::span<const int> ts, ThreadPool& pool = serial_pool());

/// Exchanges every pair of amplitudes differing only in bits t1 and t2 with
/// those bits unequal. Performs no arithmetic.
void local_swap(AmpArray& psi, int t1, int t2, ThreadPool& pool = serial_pool());

} // namespace qdist
