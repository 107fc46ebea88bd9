// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdist/transport.hpp"

#include <json.hpp>

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace qdist {

std::string_view paradigm_tag(Paradigm p) {
    switch (p) {
    case Paradigm::FullToBuffer: return "a";
    case Paradigm::Packed: return "b";
    case Paradigm::OneWay: return "c";
    case Paradigm::FullSwap: return "d";
    case Paradigm::HalfSwap: return "e";
    case Paradigm::Reduce: return "reduce";
    }
    return "?";
}

std::string to_json(const CommRecord& rec) {
    nlohmann::ordered_json j;
    j["round"] = rec.round;
    j["op"] = rec.op;
    j["sender"] = rec.sender;
    j["receiver"] = rec.receiver;
    j["count"] = rec.count;
    j["paradigm"] = paradigm_tag(rec.paradigm);
    return j.dump();
}

void write_jsonl(std::ostream& out, const std::vector<CommRecord>& log) {
    for (const auto& rec : log)
        out << to_json(rec) << '\n';
}

namespace {

/// Thrown on ranks that are unwound because another rank failed.
struct WorldAborted {};

enum class Kind { Exchange, OneWay };

const char* kind_name(Kind k) {
    return k == Kind::Exchange ? "exchange" : "one-way send";
}

} // namespace

class Fabric {
public:
    explicit Fabric(int w) : size_(1 << w), boxes_(size_ * size_), waits_(size_), finished_(size_) {}

    struct Message {
        Kind kind;
        std::uint64_t step;
        std::uint32_t seq;
        index_t total;
        index_t offset;
        std::vector<amp> data;
    };

    void post(int from, int to, Message msg) {
        {
            std::lock_guard lock(mu_);
            check_aborted();
            boxes_[box(from, to)].push_back(std::move(msg));
        }
        cv_.notify_all();
    }

    Message take(int me, int from, std::uint64_t step, std::uint32_t seq) {
        std::unique_lock lock(mu_);
        auto& q = boxes_[box(from, me)];
        if (q.empty()) {
            waits_[me] = Wait{WaitKind::Message, from, step, seq};
            detect_deadlock();
            cv_.wait(lock, [&] { return aborted_ || !q.empty(); });
            waits_[me] = Wait{};
        }
        check_aborted();
        Message msg = std::move(q.front());
        q.pop_front();
        return msg;
    }

    cplx reduce(int me, std::uint64_t step, std::uint32_t seq, cplx value) {
        std::unique_lock lock(mu_);
        check_aborted();
        auto key = std::make_pair(step, seq);
        auto& slot = reduces_[key];
        if (slot.values.empty())
            slot.values.assign(size_, cplx{});
        slot.values[me] = value;
        ++slot.arrived;
        if (slot.arrived == size_) {
            cv_.notify_all();
        } else {
            waits_[me] = Wait{WaitKind::Reduce, -1, step, seq};
            detect_deadlock();
            cv_.wait(lock, [&] { return aborted_ || reduces_[key].arrived == size_; });
            waits_[me] = Wait{};
            check_aborted();
        }
        auto& done = reduces_[key];
        cplx total = 0;
        for (const cplx& v : done.values)
            total += v;
        if (++done.consumed == size_)
            reduces_.erase(key);
        return total;
    }

    void finish(int me) {
        std::lock_guard lock(mu_);
        finished_[me] = true;
        detect_deadlock();
    }

    void fail(int me, std::exception_ptr err) {
        {
            std::lock_guard lock(mu_);
            finished_[me] = true;
            if (!first_error_)
                first_error_ = err;
            aborted_ = true;
        }
        cv_.notify_all();
    }

    std::exception_ptr first_error() const { return first_error_; }

private:
    enum class WaitKind { None, Message, Reduce };
    struct Wait {
        WaitKind kind = WaitKind::None;
        int pair = -1;
        std::uint64_t step = 0;
        std::uint32_t seq = 0;
    };
    struct ReduceSlot {
        std::vector<cplx> values;
        int arrived = 0;
        int consumed = 0;
    };

    [[nodiscard]] std::size_t box(int from, int to) const {
        return static_cast<std::size_t>(from) * size_ + to;
    }

    void check_aborted() const {
        if (aborted_)
            throw WorldAborted{};
    }

    [[nodiscard]] bool can_progress(int r) {
        const Wait& w = waits_[r];
        switch (w.kind) {
        case WaitKind::None: return true;
        case WaitKind::Message: return !boxes_[box(w.pair, r)].empty();
        case WaitKind::Reduce: return reduces_[{w.step, w.seq}].arrived == size_;
        }
        return true;
    }

    // Caller holds the lock. Fires when no rank can ever make progress again.
    void detect_deadlock() {
        if (aborted_)
            return;
        bool any_waiting = false;
        for (int r = 0; r < size_; ++r) {
            if (finished_[r])
                continue;
            if (waits_[r].kind == WaitKind::None || can_progress(r))
                return;
            any_waiting = true;
        }
        if (!any_waiting)
            return;

        std::ostringstream msg;
        msg << "deadlock: every live rank is blocked;";
        for (int r = 0; r < size_; ++r) {
            const Wait& w = waits_[r];
            if (w.kind == WaitKind::Message)
                msg << " rank " << r << " waits on rank " << w.pair;
            else if (w.kind == WaitKind::Reduce)
                msg << " rank " << r << " waits in reduce";
            else
                continue;
            msg << " (step " << w.step << ", call " << w.seq << ");";
        }
        first_error_ = std::make_exception_ptr(DeadlockError(msg.str()));
        aborted_ = true;
        cv_.notify_all();
    }

    int size_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::vector<std::deque<Message>> boxes_;
    std::vector<Wait> waits_;
    std::vector<bool> finished_;
    std::map<std::pair<std::uint64_t, std::uint32_t>, ReduceSlot> reduces_;
    bool aborted_ = false;
    std::exception_ptr first_error_;
};

RankContext::RankContext(Fabric& fabric, int rank, const WorldConfig& cfg)
    : fabric_(fabric),
      rank_(rank),
      w_(cfg.w),
      max_message_(cfg.max_message),
      pool_(cfg.threads_per_rank, cfg.cacheline_bytes) {}

RankContext::Step::Step(RankContext& ctx) : ctx_(ctx) {
    if (ctx_.depth_++ == 0)
        ++ctx_.op_;
    ++ctx_.step_;
    ctx_.seq_ = 0;
}

RankContext::Step::~Step() {
    --ctx_.depth_;
}

void RankContext::record(int receiver, index_t count, Paradigm p) {
    CommRecord rec;
    rec.op = op_;
    rec.sender = rank_;
    rec.receiver = receiver;
    rec.count = count;
    rec.paradigm = p;
    rec.step = step_;
    rec.seq = seq_;
    log_.push_back(rec);
}

void RankContext::exchange(const AmpArray& send, index_t send_off, AmpArray& recv, index_t recv_off,
                           index_t count, int pair, Paradigm p) {
    if (count == 0)
        return;
    if (pair == rank_ || pair < 0 || pair >= world_size())
        throw ProtocolError("rank " + std::to_string(rank_) + " cannot exchange with rank " +
                            std::to_string(pair));
    if (send_off + count > send.size() || recv_off + count > recv.size())
        throw ArgumentError("exchange region exceeds array bounds");

    const std::uint32_t seq = seq_;
    for (index_t off = 0; off < count; off += max_message_) {
        const index_t n = std::min(max_message_, count - off);
        const auto first = send.begin() + static_cast<std::ptrdiff_t>(send_off + off);
        fabric_.post(rank_, pair,
                     {Kind::Exchange, step_, seq, count, off, std::vector<amp>(first, first + n)});
        ++messages_sent_;
    }
    record(pair, count, p);

    for (index_t got = 0; got < count;) {
        auto msg = fabric_.take(rank_, pair, step_, seq);
        if (msg.kind != Kind::Exchange || msg.step != step_ || msg.seq != seq || msg.total != count ||
            msg.offset != got) {
            std::ostringstream err;
            err << "rank " << rank_ << " expected an exchange of " << count << " amplitudes from rank "
                << pair << " (step " << step_ << ", call " << seq << ") but received a "
                << kind_name(msg.kind) << " of " << msg.total << " (step " << msg.step << ", call "
                << msg.seq << ")";
            throw ProtocolError(err.str());
        }
        std::copy(msg.data.begin(), msg.data.end(),
                  recv.begin() + static_cast<std::ptrdiff_t>(recv_off + got));
        got += msg.data.size();
    }
    ++seq_;
}

void RankContext::send_async(const AmpArray& buf, index_t count, int pair) {
    if (pair == rank_ || pair < 0 || pair >= world_size())
        throw ProtocolError("rank " + std::to_string(rank_) + " cannot send to rank " +
                            std::to_string(pair));
    if (count > buf.size())
        throw ArgumentError("send region exceeds array bounds");
    if (last_oneway_step_ != step_) {
        last_oneway_step_ = step_;
        oneway_pairs_.clear();
    }
    if (std::find(oneway_pairs_.begin(), oneway_pairs_.end(), pair) != oneway_pairs_.end())
        throw ProtocolError("rank " + std::to_string(rank_) + " sent twice to rank " +
                            std::to_string(pair) + " in one step");
    oneway_pairs_.push_back(pair);

    index_t off = 0;
    do {
        const index_t n = std::min(max_message_, count - off);
        const auto first = buf.begin() + static_cast<std::ptrdiff_t>(off);
        fabric_.post(rank_, pair, {Kind::OneWay, step_, seq_, count, off, std::vector<amp>(first, first + n)});
        ++messages_sent_;
        off += n;
    } while (off < count);
    record(pair, count, Paradigm::OneWay);
    ++seq_;
}

void RankContext::receive(AmpArray& buf, index_t count, int pair) {
    if (count > buf.size())
        throw ArgumentError("receive region exceeds array bounds");
    index_t got = 0;
    do {
        auto msg = fabric_.take(rank_, pair, step_, seq_);
        if (msg.kind != Kind::OneWay || msg.step != step_ || msg.total != count || msg.offset != got) {
            std::ostringstream err;
            err << "rank " << rank_ << " expected a one-way send of " << count << " amplitudes from rank "
                << pair << " (step " << step_ << ") but received a " << kind_name(msg.kind) << " of "
                << msg.total << " (step " << msg.step << ")";
            throw ProtocolError(err.str());
        }
        std::copy(msg.data.begin(), msg.data.end(), buf.begin() + static_cast<std::ptrdiff_t>(got));
        got += msg.data.size();
    } while (got < count);
    ++seq_;
}

cplx RankContext::reduce_sum(cplx local) {
    const cplx total = fabric_.reduce(rank_, step_, seq_, local);
    if (rank_ == 0)
        record(-1, static_cast<index_t>(world_size()), Paradigm::Reduce);
    ++seq_;
    return total;
}

namespace detail {

WorldOutput run_world_impl(const WorldConfig& cfg, const std::function<void(RankContext&)>& program) {
    if (cfg.w < 0 || cfg.w > 16)
        throw ArgumentError("world exponent must lie in [0, 16]");
    if (cfg.max_message < 1)
        throw ArgumentError("max_message must be at least 1");

    const int size = 1 << cfg.w;
    Fabric fabric(cfg.w);
    std::vector<std::unique_ptr<RankContext>> ctxs;
    for (int r = 0; r < size; ++r)
        ctxs.push_back(std::make_unique<RankContext>(fabric, r, cfg));

    auto body = [&](int r) {
        try {
            program(*ctxs[r]);
            fabric.finish(r);
        } catch (const WorldAborted&) {
            fabric.finish(r);
        } catch (...) {
            fabric.fail(r, std::current_exception());
        }
    };

    if (size == 1) {
        body(0);
    } else {
        std::vector<std::thread> threads;
        for (int r = 0; r < size; ++r)
            threads.emplace_back(body, r);
        for (auto& t : threads)
            t.join();
    }
    if (auto err = fabric.first_error())
        std::rethrow_exception(err);

    WorldOutput out;
    for (const auto& ctx : ctxs) {
        out.log.insert(out.log.end(), ctx->log().begin(), ctx->log().end());
        out.stats.push_back({ctx->messages_sent(), ctx->writes_by_op()});
    }
    std::stable_sort(out.log.begin(), out.log.end(), [](const CommRecord& a, const CommRecord& b) {
        return std::tie(a.step, a.seq, a.sender) < std::tie(b.step, b.seq, b.sender);
    });
    std::uint64_t round = 0;
    for (std::size_t k = 0; k < out.log.size(); ++k) {
        if (k > 0 && (out.log[k].step != out.log[k - 1].step || out.log[k].seq != out.log[k - 1].seq))
            ++round;
        out.log[k].round = round;
    }
    return out;
}

} // namespace detail

} // namespace qdist
