// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdist/parallel.hpp"

#include <algorithm>

namespace qdist {

namespace {

// Below this many iterations the hand-off costs more than it saves.
constexpr index_t kSerialThreshold = 4096;

} // namespace

ThreadPool::ThreadPool(unsigned threads, unsigned cacheline_bytes)
    : num_threads_(std::max(1u, threads)),
      quantum_(std::max<index_t>(1, cacheline_bytes / sizeof(cplx))) {
    for (unsigned t = 1; t < num_threads_; ++t)
        workers_.emplace_back([this, t] { worker(t); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_)
        w.join();
}

void ThreadPool::worker(unsigned tid) {
    std::uint64_t seen = 0;
    for (;;) {
        const std::function<void(unsigned)>* job;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_)
                return;
            seen = generation_;
            job = job_;
        }
        (*job)(tid);
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0)
                done_.notify_one();
        }
    }
}

void ThreadPool::for_blocks(index_t count, const std::function<void(index_t, index_t)>& body) {
    if (count == 0)
        return;
    if (num_threads_ == 1 || count < kSerialThreshold) {
        body(0, count);
        return;
    }

    index_t per = (count + num_threads_ - 1) / num_threads_;
    per = (per + quantum_ - 1) / quantum_ * quantum_;

    const std::function<void(unsigned)> job = [&](unsigned tid) {
        const index_t begin = std::min(count, tid * per);
        const index_t end = std::min(count, begin + per);
        if (begin < end)
            body(begin, end);
    };

    {
        std::lock_guard lock(mutex_);
        job_ = &job;
        pending_ = num_threads_ - 1;
        ++generation_;
    }
    wake_.notify_all();
    job(0);
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return pending_ == 0; });
    job_ = nullptr;
}

} // namespace qdist
