// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file parallel.hpp
 * @brief Static-schedule thread pool for amplitude loops.
 */

#pragma once

#include "qdist/bits.hpp"
#include "qdist/types.hpp"

#include <algorithm>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qdist {

/// Splits an iteration range into one contiguous block per thread. Block
/// lengths are a multiple of the number of amplitudes per cache line, so two
/// threads never write the same line of a contiguously indexed array.
class ThreadPool {
public:
    explicit ThreadPool(unsigned threads = 1, unsigned cacheline_bytes = 64);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    [[nodiscard]] unsigned size() const { return num_threads_; }
    [[nodiscard]] index_t block_quantum() const { return quantum_; }

    /// Calls body(begin, end) over disjoint blocks covering [0, count).
    void for_blocks(index_t count, const std::function<void(index_t, index_t)>& body);

    template <class F>
    void for_each(index_t count, F&& f) {
        for_blocks(count, [&](index_t begin, index_t end) {
            for (index_t k = begin; k < end; ++k)
                f(k);
        });
    }

    /// Sum of f(k) over [0, count). Partial sums are taken over fixed-size
    /// chunks and combined in ascending order, so the result does not depend
    /// on the thread count.
    template <class F>
    cplx sum(index_t count, F&& f) {
        const index_t chunks = (count + kSumChunk - 1) / kSumChunk;
        std::vector<cplx> partial(chunks);
        for_blocks(chunks, [&](index_t begin, index_t end) {
            for (index_t c = begin; c < end; ++c) {
                cplx s = 0;
                const index_t hi = std::min(count, (c + 1) * kSumChunk);
                for (index_t k = c * kSumChunk; k < hi; ++k)
                    s += f(k);
                partial[c] = s;
            }
        });
        cplx total = 0;
        for (const cplx& s : partial)
            total += s;
        return total;
    }

    static constexpr index_t kSumChunk = 1024;

private:
    void worker(unsigned tid);

    unsigned num_threads_;
    index_t quantum_;
    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(unsigned)>* job_ = nullptr;
    std::uint64_t generation_ = 0;
    unsigned pending_ = 0;
    bool stopping_ = false;
};

} // namespace qdist
