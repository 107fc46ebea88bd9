// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "helpers.hpp"

#include "qdist/local.hpp"

#include <doctest.h>

using namespace qdist;

namespace {

AmpArray to_amps(const oracle::Vec& v) {
    return AmpArray(v.data(), v.data() + v.size());
}

std::vector<cplx> to_cplx_vec(const AmpArray& a) {
    std::vector<cplx> out;
    for (const auto& x : a)
        out.push_back(to_cplx(x));
    return out;
}

AmpArray basis(int n, index_t i) {
    AmpArray a(pow2(n));
    a[i] = 1;
    return a;
}

const Matrix2 kX{{{0, 1}, {1, 0}}};

} // namespace

TEST_CASE("one-target kernel") {
    std::mt19937_64 rng(3);
    auto psi = to_amps(oracle::random_state(3, rng));
    const auto before = psi;
    local_one_target(psi, Matrix2::identity(), 1);
    CHECK(psi == before);

    auto one = basis(1, 0);
    local_one_target(one, kX, 0);
    CHECK(to_cplx(one[1]) == cplx(1, 0));
    CHECK(to_cplx(one[0]) == cplx(0, 0));

    const auto v = oracle::random_state(4, rng);
    const auto m = oracle::random_matrix(1, rng);
    auto a = to_amps(v);
    local_one_target(a, testing::to_matrix2(m), 2);
    const int ts[] = {2};
    CHECK(oracle::max_abs_diff(to_cplx_vec(a), testing::to_vector(oracle::dense_apply(v, m, ts))) < 1e-12);
}

TEST_CASE("controlled one-target kernel") {
    const int ctrl[] = {1};
    auto a = basis(2, 0b10);
    local_many_ctrl_one_target(a, ctrl, kX, 0);
    CHECK(to_cplx(a[0b11]) == cplx(1, 0));

    auto b = basis(2, 0b00);
    local_many_ctrl_one_target(b, ctrl, kX, 0);
    CHECK(to_cplx(b[0b00]) == cplx(1, 0));

    std::mt19937_64 rng(4);
    const auto v = oracle::random_state(5, rng);
    const auto m = oracle::random_matrix(1, rng);
    auto c = to_amps(v);
    const int cs[] = {0, 3};
    const int ts[] = {2};
    local_many_ctrl_one_target(c, cs, testing::to_matrix2(m), 2);
    CHECK(oracle::max_abs_diff(to_cplx_vec(c), testing::to_vector(oracle::dense_apply(v, m, ts, cs))) < 1e-12);
}

TEST_CASE("many-target kernel") {
    std::mt19937_64 rng(5);
    const auto v = oracle::random_state(4, rng);
    auto a = to_amps(v);
    const int ts01[] = {0, 1};
    local_many_target(a, MatrixN::identity(2), ts01);
    CHECK(oracle::max_abs_diff(to_cplx_vec(a), testing::to_vector(v)) == 0);

    // Relabelling targets is the same as permuting the matrix's index bits.
    const auto m = oracle::random_matrix(2, rng);
    oracle::Mat swapped(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const int rs = ((r & 1) << 1) | (r >> 1);
            const int cs = ((c & 1) << 1) | (c >> 1);
            swapped(rs, cs) = m(r, c);
        }
    auto x = to_amps(v);
    auto y = to_amps(v);
    const int ts10[] = {1, 0};
    local_many_target(x, oracle::from_eigen(m), ts01);
    local_many_target(y, oracle::from_eigen(swapped), ts10);
    CHECK(oracle::max_abs_diff(to_cplx_vec(x), to_cplx_vec(y)) < 1e-14);

    const auto w = oracle::random_state(6, rng);
    const auto m3 = oracle::random_matrix(3, rng);
    auto z = to_amps(w);
    const int ts[] = {4, 0, 2};
    local_many_target(z, oracle::from_eigen(m3), ts);
    CHECK(oracle::max_abs_diff(to_cplx_vec(z), testing::to_vector(oracle::dense_apply(w, m3, ts))) < 1e-12);

    auto bad = to_amps(w);
    const int dup[] = {1, 1};
    CHECK_THROWS_AS(local_many_target(bad, MatrixN::identity(2), dup), ArgumentError);
    CHECK_THROWS_AS(local_many_target(bad, MatrixN::identity(3), ts01), ArgumentError);
}

TEST_CASE("controlled many-target kernel") {
    std::mt19937_64 rng(6);
    const auto v = oracle::random_state(6, rng);
    const auto m = oracle::random_matrix(2, rng);
    auto a = to_amps(v);
    const int ts[] = {3, 1};
    const int cs[] = {0, 5};
    local_many_ctrl_many_target(a, cs, oracle::from_eigen(m), ts);
    CHECK(oracle::max_abs_diff(to_cplx_vec(a), testing::to_vector(oracle::dense_apply(v, m, ts, cs))) < 1e-12);
}

TEST_CASE("swap kernel moves amplitudes") {
    auto a = basis(2, 0b01);
    local_swap(a, 0, 1);
    CHECK(to_cplx(a[0b10]) == cplx(1, 0));

    std::mt19937_64 rng(7);
    const auto v = oracle::random_state(5, rng);
    auto b = to_amps(v);
    local_swap(b, 4, 1);
    oracle::Mat swap = oracle::Mat::Zero(4, 4);
    swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1;
    const int ts[] = {4, 1};
    CHECK(oracle::max_abs_diff(to_cplx_vec(b), testing::to_vector(oracle::dense_apply(v, swap, ts))) == 0);
}

TEST_CASE("kernels give identical results for any thread count") {
    std::mt19937_64 rng(8);
    const auto v = oracle::random_state(14, rng);
    const auto m = oracle::from_eigen(oracle::random_unitary(2, rng));
    const int ts[] = {3, 12};
    AmpArray serial = to_amps(v);
    local_many_target(serial, m, ts);
    for (unsigned threads : {2u, 3u}) {
        ThreadPool pool(threads);
        AmpArray par = to_amps(v);
        local_many_target(par, m, ts, pool);
        CHECK(par == serial);
    }
}
