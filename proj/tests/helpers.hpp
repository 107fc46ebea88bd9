// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "oracle.hpp"

#include "qdist/density.hpp"
#include "qdist/statevec.hpp"

#include <functional>
#include <vector>

namespace testing {

using qdist::cplx;

struct Outcome {
    std::vector<cplx> amps;
    std::vector<qdist::CommRecord> log;
    std::vector<qdist::RankStats> stats;
};

inline std::vector<cplx> to_vector(const oracle::Vec& v) {
    return {v.data(), v.data() + v.size()};
}

/// Distributes psi over 2^w ranks, applies op on every rank and gathers.
inline Outcome run_sv(int w, const oracle::Vec& psi, const std::function<void(qdist::DistributedRegister&)>& op,
                      qdist::WorldConfig cfg = {}) {
    cfg.w = w;
    const int n = oracle::qubits_of(psi.size());
    auto run = qdist::run_world(cfg, [&](qdist::RankContext& ctx) {
        qdist::DistributedRegister reg(ctx, n);
        reg.init([&](qdist::index_t i) { return psi[static_cast<Eigen::Index>(i)]; });
        op(reg);
        return reg.amps();
    });
    return {qdist::gather(run.results), std::move(run.log), std::move(run.stats)};
}

/// Same for a density matrix; amps holds the gathered Choi-vector.
inline Outcome run_dm(int w, const oracle::Mat& rho, const std::function<void(qdist::ChoiRegister&)>& op,
                      qdist::WorldConfig cfg = {}) {
    cfg.w = w;
    const int n = oracle::qubits_of(rho.rows());
    auto run = qdist::run_world(cfg, [&](qdist::RankContext& ctx) {
        qdist::ChoiRegister reg(ctx, n);
        reg.init([&](qdist::index_t k, qdist::index_t l) {
            return rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
        });
        op(reg);
        return reg.vec().amps();
    });
    return {qdist::gather(run.results), std::move(run.log), std::move(run.stats)};
}

inline qdist::index_t total_exchanged(const std::vector<qdist::CommRecord>& log) {
    qdist::index_t total = 0;
    for (const auto& r : log)
        if (r.paradigm != qdist::Paradigm::Reduce)
            total += r.count;
    return total;
}

inline std::size_t distinct_rounds(const std::vector<qdist::CommRecord>& log) {
    std::vector<std::uint64_t> rs;
    for (const auto& r : log)
        rs.push_back(r.round);
    std::sort(rs.begin(), rs.end());
    return static_cast<std::size_t>(std::unique(rs.begin(), rs.end()) - rs.begin());
}

inline qdist::Matrix2 to_matrix2(const oracle::Mat& m) {
    qdist::Matrix2 out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            out.m[r][c] = m(r, c);
    return out;
}

} // namespace testing
