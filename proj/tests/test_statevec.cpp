// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qdist;
using testing::run_sv;
using testing::to_vector;

namespace {

const Matrix2 kX{{{0, 1}, {1, 0}}};

oracle::Vec basis(int n, index_t i) {
    oracle::Vec v = oracle::Vec::Zero(static_cast<Eigen::Index>(pow2(n)));
    v[static_cast<Eigen::Index>(i)] = 1;
    return v;
}

double diff(const std::vector<cplx>& a, const oracle::Vec& b) {
    return oracle::max_abs_diff(a, to_vector(b));
}

} // namespace

TEST_CASE("basis-state initialization") {
    WorldConfig cfg;
    cfg.w = 2;
    auto zero = run_world(cfg, [](RankContext& ctx) {
        DistributedRegister reg(ctx, 4);
        reg.init_basis_state(0);
        return reg.amps();
    });
    const auto all = gather(zero.results);
    CHECK(all[0] == cplx(1, 0));
    for (std::size_t i = 1; i < all.size(); ++i)
        CHECK(all[i] == cplx(0, 0));

    auto last = run_world(cfg, [](RankContext& ctx) {
        DistributedRegister reg(ctx, 4);
        reg.init_basis_state(15);
        return reg.amps();
    });
    CHECK(to_cplx(last.results[3][3]) == cplx(1, 0));
    double norm = 0;
    for (const cplx& a : gather(last.results))
        norm += std::norm(a);
    CHECK(norm == 1.0);
}

TEST_CASE("registers need at least one qubit per rank bit") {
    WorldConfig cfg;
    cfg.w = 3;
    CHECK_THROWS_AS(run_world(cfg, [](RankContext& ctx) { DistributedRegister reg(ctx, 2); }), CapacityError);
}

TEST_CASE("distributed one-target gate") {
    auto out = run_sv(1, basis(2, 0), [](DistributedRegister& reg) { dist_one_target(reg, kX, 1); });
    CHECK(diff(out.amps, basis(2, 0b10)) == 0);
    CHECK(testing::distinct_rounds(out.log) == 1);
    CHECK(testing::total_exchanged(out.log) == 4);

    std::mt19937_64 rng(11);
    const auto psi = oracle::random_state(6, rng);
    const auto m = oracle::random_matrix(1, rng);
    auto local = run_sv(2, psi, [&](DistributedRegister& reg) { dist_one_target(reg, testing::to_matrix2(m), 3); });
    CHECK(local.log.empty());
    for (int t = 0; t < 6; ++t) {
        auto res = run_sv(2, psi, [&](DistributedRegister& reg) { dist_one_target(reg, testing::to_matrix2(m), t); });
        const int ts[] = {t};
        CHECK(diff(res.amps, oracle::dense_apply(psi, m, ts)) < 1e-12);
    }
}

TEST_CASE("distributed controlled one-target gate") {
    std::mt19937_64 rng(12);
    const auto psi = oracle::random_state(4, rng);
    const auto m = oracle::random_matrix(1, rng);
    const int cs[] = {0};
    const int ts[] = {3};
    auto out = run_sv(2, psi, [&](DistributedRegister& reg) {
        dist_many_ctrl_one_target(reg, cs, testing::to_matrix2(m), 3);
    });
    CHECK(diff(out.amps, oracle::dense_apply(psi, m, ts, cs)) < 1e-12);
    REQUIRE(out.log.size() == 4);
    for (const auto& rec : out.log)
        CHECK(rec.count == pow2(4 - 2) / 2);

    // Ranks whose prefix control bit is 0 neither communicate nor write.
    const int pc[] = {3};
    auto idle = run_sv(1, psi, [&](DistributedRegister& reg) {
        dist_many_ctrl_one_target(reg, pc, testing::to_matrix2(m), 2);
    });
    for (const auto& rec : idle.log)
        CHECK(rec.sender == 1);
    for (int i = 0; i < 8; ++i)
        CHECK(idle.amps[i] == psi[i]);
    const int t2[] = {2};
    CHECK(diff(idle.amps, oracle::dense_apply(psi, m, t2, pc)) < 1e-12);
}

TEST_CASE("distributed swap") {
    auto flip = run_sv(0, basis(2, 0b01), [](DistributedRegister& reg) { dist_swap(reg, 0, 1); });
    CHECK(diff(flip.amps, basis(2, 0b10)) == 0);

    std::mt19937_64 rng(13);
    const auto psi = oracle::random_state(6, rng);
    oracle::Mat swap = oracle::Mat::Zero(4, 4);
    swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1;
    auto split = run_sv(3, psi, [](DistributedRegister& reg) { dist_swap(reg, 1, 5); });
    const int ts[] = {1, 5};
    CHECK(diff(split.amps, oracle::dense_apply(psi, swap, ts)) == 0);
    REQUIRE(split.log.size() == 8);
    for (const auto& rec : split.log)
        CHECK(rec.count == pow2(6 - 3) / 2);
    CHECK(testing::total_exchanged(split.log) == pow2(6) / 2);

    // Both targets in the prefix: ranks whose two bits agree stay idle.
    auto both = run_sv(3, psi, [](DistributedRegister& reg) { dist_swap(reg, 3, 5); });
    const int pt[] = {3, 5};
    CHECK(diff(both.amps, oracle::dense_apply(psi, swap, pt)) == 0);
    for (const auto& rec : both.log)
        CHECK(get_bit(rec.sender, 0) != get_bit(rec.sender, 2));
}

TEST_CASE("distributed many-target gate") {
    std::mt19937_64 rng(14);
    const auto psi = oracle::random_state(5, rng);
    const auto u = oracle::random_unitary(2, rng);
    const int local_ts[] = {0, 2};
    auto local = run_sv(2, psi, [&](DistributedRegister& reg) {
        dist_many_target(reg, oracle::from_eigen(u), local_ts);
    });
    CHECK(local.log.empty());
    CHECK(diff(local.amps, oracle::dense_apply(psi, u, local_ts)) < 1e-12);

    const int ts[] = {4, 3};
    auto out = run_sv(2, psi, [&](DistributedRegister& reg) { dist_many_target(reg, oracle::from_eigen(u), ts); });
    CHECK(diff(out.amps, oracle::dense_apply(psi, u, ts)) < 1e-12);
    CHECK(testing::distinct_rounds(out.log) == 4);

    // The identity still performs (and undoes) its swaps.
    auto id = run_sv(2, psi, [&](DistributedRegister& reg) { dist_many_target(reg, MatrixN::identity(2), ts); });
    CHECK(diff(id.amps, psi) == 0);
    CHECK(testing::distinct_rounds(id.log) == 4);

    const int cs[] = {0, 4};
    const int ct[] = {3, 1};
    auto ctrl = run_sv(2, psi, [&](DistributedRegister& reg) {
        dist_many_target(reg, oracle::from_eigen(u), ct, cs);
    });
    CHECK(diff(ctrl.amps, oracle::dense_apply(psi, u, ct, cs)) < 1e-12);

    const int too_many[] = {0, 1, 2};
    CHECK_THROWS_AS(run_sv(3, psi, [&](DistributedRegister& reg) {
                        dist_many_target(reg, MatrixN::identity(3), too_many);
                    }),
                    CapacityError);
}

TEST_CASE("distributed Pauli tensor") {
    std::mt19937_64 rng(15);
    const auto psi = oracle::random_state(5, rng);
    const Pauli zs[] = {Pauli::Z, Pauli::Z};
    const int zt[] = {4, 1};
    auto diag = run_sv(2, psi, [&](DistributedRegister& reg) { dist_pauli_tensor(reg, zs, zt); });
    CHECK(diag.log.empty());
    CHECK(diff(diag.amps, oracle::pauli_lift(5, zs, zt) * psi) == 0);

    const Pauli x[] = {Pauli::X};
    const int x0[] = {0};
    auto flip = run_sv(2, basis(5, 0), [&](DistributedRegister& reg) { dist_pauli_tensor(reg, x, x0); });
    CHECK(diff(flip.amps, basis(5, 1)) == 0);

    const Pauli s[] = {Pauli::X, Pauli::Y, Pauli::Z};
    const int ts[] = {4, 2, 0};
    auto out = run_sv(2, psi, [&](DistributedRegister& reg) { dist_pauli_tensor(reg, s, ts); });
    CHECK(diff(out.amps, oracle::pauli_lift(5, s, ts) * psi) < 1e-15);
    CHECK(testing::total_exchanged(out.log) == pow2(5));
}

TEST_CASE("distributed phase gadget") {
    std::mt19937_64 rng(16);
    const auto psi = oracle::random_state(4, rng);
    const int ts[] = {0, 3};
    auto zero = run_sv(2, psi, [&](DistributedRegister& reg) { dist_phase_gadget(reg, ts, 0.0); });
    CHECK(diff(zero.amps, psi) == 0);

    const int one[] = {0};
    auto single = run_sv(0, basis(1, 1), [&](DistributedRegister& reg) { dist_phase_gadget(reg, one, 0.4); });
    CHECK(std::abs(single.amps[1] - std::polar(1.0, -0.4)) < 1e-15);

    auto out = run_sv(2, psi, [&](DistributedRegister& reg) { dist_phase_gadget(reg, ts, 0.7); });
    const Pauli zz[] = {Pauli::Z, Pauli::Z};
    const oracle::Mat z = oracle::pauli_lift(4, zz, ts);
    oracle::Mat gadget = oracle::Mat::Zero(16, 16);
    for (int i = 0; i < 16; ++i)
        gadget(i, i) = std::polar(1.0, 0.7 * z(i, i).real());
    CHECK(diff(out.amps, gadget * psi) < 1e-12);
    CHECK(out.log.empty());
}

TEST_CASE("distributed Pauli gadget") {
    std::mt19937_64 rng(17);
    const auto psi = oracle::random_state(5, rng);
    const Pauli s[] = {Pauli::X, Pauli::Z};
    const int ts[] = {4, 1};
    auto zero = run_sv(2, psi, [&](DistributedRegister& reg) { dist_pauli_gadget(reg, s, ts, 0.0); });
    CHECK(diff(zero.amps, psi) < 1e-15);

    auto quarter = run_sv(2, psi, [&](DistributedRegister& reg) {
        dist_pauli_gadget(reg, s, ts, std::numbers::pi / 2);
    });
    auto tensor = run_sv(2, psi, [&](DistributedRegister& reg) {
        dist_pauli_tensor(reg, s, ts);
        dist_scale(reg, cplx(0, 1));
    });
    CHECK(oracle::max_abs_diff(quarter.amps, tensor.amps) < 1e-15);

    const oracle::Mat p = oracle::pauli_lift(5, s, ts);
    const oracle::Mat g = std::cos(1.1) * oracle::Mat::Identity(32, 32) + cplx(0, std::sin(1.1)) * p;
    auto out = run_sv(2, psi, [&](DistributedRegister& reg) { dist_pauli_gadget(reg, s, ts, 1.1); });
    CHECK(diff(out.amps, g * psi) < 1e-12);
}

TEST_CASE("results do not depend on threads per rank") {
    std::mt19937_64 rng(18);
    const auto psi = oracle::random_state(12, rng);
    const auto u = oracle::from_eigen(oracle::random_unitary(2, rng));
    const Matrix2 h = testing::to_matrix2(oracle::random_unitary(1, rng));
    auto program = [&](DistributedRegister& reg) {
        dist_one_target(reg, h, 11);
        const int ts[] = {10, 2};
        dist_many_target(reg, u, ts);
        const Pauli s[] = {Pauli::Y, Pauli::X};
        const int ps[] = {0, 11};
        dist_pauli_gadget(reg, s, ps, 0.3);
    };
    WorldConfig one;
    WorldConfig three;
    three.threads_per_rank = 3;
    const auto a = run_sv(1, psi, program, one);
    const auto b = run_sv(1, psi, program, three);
    CHECK(a.amps == b.amps);
}
