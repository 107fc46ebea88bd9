// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file types.hpp
 * @brief Amplitude scalar, operator matrices and error types.
 */

#pragma once

#include "qdist/bits.hpp"

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdist {

/// Plain complex scalar used for operator elements and results.
using cplx = std::complex<double>;

namespace flops {

/// Number of complex arithmetic operations performed on amplitudes since the
/// last reset, summed over all threads. Always zero unless the library was
/// built with QDIST_COUNT_FLOPS.
std::uint64_t count();
void reset();
bool enabled();

namespace detail {
void bump();
}

} // namespace flops

#ifdef QDIST_COUNT_FLOPS

/// Complex double that counts every arithmetic operation applied to it.
/// Results are bit-identical to std::complex<double>.
class counted_complex {
public:
    constexpr counted_complex() = default;
    constexpr counted_complex(double re) : v_(re) {}
    constexpr counted_complex(double re, double im) : v_(re, im) {}
    constexpr counted_complex(const cplx& v) : v_(v) {}

    [[nodiscard]] constexpr double real() const { return v_.real(); }
    [[nodiscard]] constexpr double imag() const { return v_.imag(); }
    [[nodiscard]] constexpr const cplx& value() const { return v_; }

    counted_complex& operator+=(const counted_complex& o) { flops::detail::bump(); v_ += o.v_; return *this; }
    counted_complex& operator-=(const counted_complex& o) { flops::detail::bump(); v_ -= o.v_; return *this; }
    counted_complex& operator*=(const counted_complex& o) { flops::detail::bump(); v_ *= o.v_; return *this; }
    counted_complex& operator*=(double o) { flops::detail::bump(); v_ *= o; return *this; }

    friend counted_complex operator+(const counted_complex& a, const counted_complex& b) { flops::detail::bump(); return a.v_ + b.v_; }
    friend counted_complex operator-(const counted_complex& a, const counted_complex& b) { flops::detail::bump(); return a.v_ - b.v_; }
    friend counted_complex operator*(const counted_complex& a, const counted_complex& b) { flops::detail::bump(); return a.v_ * b.v_; }
    friend counted_complex operator*(double a, const counted_complex& b) { flops::detail::bump(); return a * b.v_; }
    friend counted_complex operator*(const counted_complex& a, double b) { flops::detail::bump(); return a.v_ * b; }
    friend counted_complex operator-(const counted_complex& a) { flops::detail::bump(); return -a.v_; }
    friend bool operator==(const counted_complex& a, const counted_complex& b) { return a.v_ == b.v_; }

    friend counted_complex conj(const counted_complex& a) { flops::detail::bump(); return std::conj(a.v_); }

private:
    cplx v_;
};

using amp = counted_complex;

[[nodiscard]] inline cplx to_cplx(const amp& a) { return a.value(); }

#else

using amp = cplx;

[[nodiscard]] inline cplx to_cplx(const amp& a) { return a; }

#endif

using AmpArray = std::vector<amp>;

/// General 2x2 operator, indexed m[row][col].
struct Matrix2 {
    cplx m[2][2]{};

    static Matrix2 identity() { return {{{1, 0}, {0, 1}}}; }
};

/// Dense 2^n x 2^n operator stored row-major. Bit q of the row/column index
/// corresponds to the q-th entry of the target list it is applied with.
struct MatrixN {
    int n = 0;
    std::vector<cplx> elems;

    MatrixN() = default;
    explicit MatrixN(int num_qubits) : n(num_qubits), elems(pow2(2 * num_qubits)) {}

    [[nodiscard]] index_t dim() const { return pow2(n); }
    cplx& operator()(index_t r, index_t c) { return elems[r * dim() + c]; }
    const cplx& operator()(index_t r, index_t c) const { return elems[r * dim() + c]; }

    static MatrixN identity(int num_qubits);
    static MatrixN from(const Matrix2& m);
    [[nodiscard]] MatrixN conjugated() const;
};

enum class Pauli : int { I = 0, X = 1, Y = 2, Z = 3 };

/// Sum of real-weighted Pauli strings. codes holds num_qubits entries per
/// term, term-major, least significant qubit first.
struct PauliString {
    std::vector<double> coeffs;
    std::vector<Pauli> codes;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed operator arguments (out-of-range or repeated qubits, bad sizes).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// The operation needs more local qubits than the distribution provides.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Ranks disagreed about a communication step.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Every live rank is blocked on a message that can never arrive.
class DeadlockError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

} // namespace qdist
