// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file transport.hpp
 * @brief Pairwise amplitude exchange between ranks, and an in-process world
 * that runs one thread per rank.
 *
 * A real MPI backend would implement the same RankContext surface: exchange,
 * send_async, receive and reduce_sum.
 */

#pragma once

#include "qdist/parallel.hpp"
#include "qdist/types.hpp"

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace qdist {

/// How a communication round moves amplitudes between a pair of ranks.
enum class Paradigm {
    FullToBuffer, ///< (a) whole local array into the pair's buffer
    Packed,       ///< (b) packed subset of the buffer into the pair's buffer
    OneWay,       ///< (c) one rank sends, its pair only receives
    FullSwap,     ///< (d) pairs trade their whole local arrays
    HalfSwap,     ///< (e) pairs trade packed halves of their local arrays
    Reduce,       ///< collective scalar sum
};

std::string_view paradigm_tag(Paradigm p);

struct CommRecord {
    std::uint64_t round = 0; ///< dense round number in the merged log
    std::uint64_t op = 0;    ///< top-level operation index on the rank
    int sender = 0;
    int receiver = 0; ///< -1 for a collective
    index_t count = 0;
    Paradigm paradigm = Paradigm::FullToBuffer;

    // Internal ordering key: the kernel step and the call index within it.
    std::uint64_t step = 0;
    std::uint32_t seq = 0;
};

/// One JSON object per line: round, op, sender, receiver, count, paradigm.
void write_jsonl(std::ostream& out, const std::vector<CommRecord>& log);
std::string to_json(const CommRecord& rec);

struct WorldConfig {
    int w = 0;                       ///< world size is 2^w
    index_t max_message = pow2(20);  ///< amplitudes per physical message
    unsigned threads_per_rank = 1;
    unsigned cacheline_bytes = 64;
};

class Fabric;

/// One rank's handle on the world. Confined to the rank's controlling thread.
class RankContext {
public:
    RankContext(Fabric& fabric, int rank, const WorldConfig& cfg);

    [[nodiscard]] int rank() const { return rank_; }
    [[nodiscard]] int world_exp() const { return w_; }
    [[nodiscard]] int world_size() const { return 1 << w_; }
    [[nodiscard]] ThreadPool& pool() { return pool_; }

    /// Sends send[send_off, send_off+count) to pair and receives the pair's
    /// mirrored send into recv[recv_off, recv_off+count). Send and receive
    /// regions may alias the same array.
    void exchange(const AmpArray& send, index_t send_off, AmpArray& recv, index_t recv_off,
                  index_t count, int pair, Paradigm p);

    /// Posts count amplitudes to pair without waiting for delivery.
    void send_async(const AmpArray& buf, index_t count, int pair);
    /// Blocks until the pair's one-way message arrives.
    void receive(AmpArray& buf, index_t count, int pair);

    /// Sum over all ranks, added in ascending rank order.
    cplx reduce_sum(cplx local);

    [[nodiscard]] const std::vector<CommRecord>& log() const { return log_; }
    [[nodiscard]] std::uint64_t messages_sent() const { return messages_sent_; }
    [[nodiscard]] const std::map<std::uint64_t, index_t>& writes_by_op() const { return writes_; }

    void note_writes(index_t n) { writes_[op_] += n; }

    /// Advances past n nested steps that this rank does not take part in, so
    /// its step numbering stays aligned with ranks that do.
    void skip_steps(std::uint64_t n) {
        step_ += n;
        seq_ = 0;
    }

    /// Marks one distributed kernel invocation. Every rank must construct the
    /// same sequence of steps; nested steps belong to the outermost op.
    class Step {
    public:
        explicit Step(RankContext& ctx);
        ~Step();
        Step(const Step&) = delete;
        Step& operator=(const Step&) = delete;

    private:
        RankContext& ctx_;
    };

private:
    void record(int receiver, index_t count, Paradigm p);

    Fabric& fabric_;
    int rank_;
    int w_;
    index_t max_message_;
    ThreadPool pool_;

    std::vector<CommRecord> log_;
    std::map<std::uint64_t, index_t> writes_;
    std::uint64_t messages_sent_ = 0;
    std::uint64_t step_ = 0;
    std::uint32_t seq_ = 0;
    std::uint64_t op_ = 0;
    int depth_ = 0;
    std::uint64_t last_oneway_step_ = ~std::uint64_t{0};
    std::vector<int> oneway_pairs_;
};

struct RankStats {
    std::uint64_t messages_sent = 0;
    std::map<std::uint64_t, index_t> writes_by_op;
};

template <class R>
struct WorldRun {
    std::vector<R> results;          ///< indexed by rank
    std::vector<CommRecord> log;     ///< merged, ordered by (round, sender)
    std::vector<RankStats> stats;    ///< indexed by rank
};

namespace detail {

struct WorldOutput {
    std::vector<CommRecord> log;
    std::vector<RankStats> stats;
};

WorldOutput run_world_impl(const WorldConfig& cfg, const std::function<void(RankContext&)>& program);

} // namespace detail

/// Runs program(ctx) concurrently on every rank of a 2^w world and returns
/// the per-rank results with the merged communication log. The first
/// exception raised by any rank is rethrown after all ranks stop; a world in
/// which every live rank waits on a message that cannot arrive raises
/// DeadlockError naming the blocked pairs.
template <class F>
auto run_world(const WorldConfig& cfg, F&& program) {
    using R0 = std::invoke_result_t<F&, RankContext&>;
    using R = std::conditional_t<std::is_void_v<R0>, std::monostate, R0>;
    WorldRun<R> run;
    run.results.resize(std::size_t{1} << cfg.w);
    auto out = detail::run_world_impl(cfg, [&](RankContext& ctx) {
        if constexpr (std::is_void_v<R0>)
            program(ctx);
        else
            run.results[ctx.rank()] = program(ctx);
    });
    run.log = std::move(out.log);
    run.stats = std::move(out.stats);
    return run;
}

} // namespace qdist
