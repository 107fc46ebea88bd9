// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdist/circuit.hpp"

#include "qdist/density.hpp"
#include "qdist/statevec.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace qdist::cli {

namespace {

using Tokens = std::vector<std::string>;

Tokens tokenize(std::string_view line) {
    Tokens out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty())
            out.push_back(std::move(cur));
        cur.clear();
    };
    for (char c : line) {
        if (c == ' ' || c == '\t' || c == '\r') {
            flush();
        } else if (c == ';' || c == ':') {
            flush();
            out.emplace_back(1, c);
        } else {
            cur += c;
        }
    }
    flush();
    return out;
}

class LineParser {
public:
    LineParser(int line, Tokens toks) : line_(line), toks_(std::move(toks)) {}

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

    bool done() const { return pos_ >= toks_.size(); }
    const std::string& peek() const { return toks_[pos_]; }

    const std::string& next(std::string_view what) {
        if (done())
            fail("missing " + std::string(what));
        return toks_[pos_++];
    }

    void expect_end() const {
        if (!done())
            fail("unexpected trailing token '" + toks_[pos_] + "'");
    }

    long long integer(std::string_view what) {
        const std::string& s = next(what);
        long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            fail("expected an integer " + std::string(what) + ", got '" + s + "'");
        return v;
    }

    int qubit() { return static_cast<int>(integer("qubit index")); }

    std::vector<int> qubits(std::size_t count) {
        std::vector<int> out;
        for (std::size_t q = 0; q < count; ++q)
            out.push_back(qubit());
        return out;
    }

    double real(std::string_view what) {
        const std::string& s = next(what);
        return parse_real(s, what);
    }

    double parse_real(const std::string& s, std::string_view what) const {
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
            fail("expected a number for " + std::string(what) + ", got '" + s + "'");
        return v;
    }

    cplx complex(const std::string& s) const {
        const auto comma = s.find(',');
        if (comma == std::string::npos)
            return {parse_real(s, "matrix entry"), 0};
        return {parse_real(s.substr(0, comma), "matrix entry"), parse_real(s.substr(comma + 1), "matrix entry")};
    }

    /// Reads dim rows of dim entries, rows separated by ';'. Stops before a
    /// ':' or the end of the line.
    MatrixN matrix(int n) {
        MatrixN m(n);
        const index_t dim = m.dim();
        index_t row = 0;
        index_t col = 0;
        while (!done() && peek() != ":") {
            const std::string& tok = next("matrix entry");
            if (tok == ";") {
                if (col != dim)
                    fail("matrix row " + std::to_string(row) + " has " + std::to_string(col) + " entries, expected " +
                         std::to_string(dim));
                ++row;
                col = 0;
                continue;
            }
            if (row >= dim)
                fail("matrix has more than " + std::to_string(dim) + " rows");
            if (col >= dim)
                fail("matrix row " + std::to_string(row) + " has more than " + std::to_string(dim) + " entries");
            m(row, col++) = complex(tok);
        }
        if (col != 0) {
            if (col != dim)
                fail("matrix row " + std::to_string(row) + " has " + std::to_string(col) + " entries, expected " +
                     std::to_string(dim));
            ++row;
        }
        if (row != dim)
            fail("matrix has " + std::to_string(row) + " rows, expected " + std::to_string(dim));
        return m;
    }

    std::vector<Pauli> paulis(std::string_view codes, bool allow_identity) const {
        std::vector<Pauli> out;
        for (char c : codes) {
            switch (c) {
            case 'I':
                if (!allow_identity)
                    fail("Pauli code I is not allowed here");
                out.push_back(Pauli::I);
                break;
            case 'X': out.push_back(Pauli::X); break;
            case 'Y': out.push_back(Pauli::Y); break;
            case 'Z': out.push_back(Pauli::Z); break;
            default: fail(std::string("unknown Pauli code '") + c + "'");
            }
        }
        return out;
    }

private:
    int line_;
    Tokens toks_;
    std::size_t pos_ = 0;
};

const double kInvSqrt2 = 1 / std::numbers::sqrt2;

std::optional<Matrix2> named_gate(const std::string& name) {
    const cplx i{0, 1};
    if (name == "H")
        return Matrix2{{{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}}};
    if (name == "X")
        return Matrix2{{{0, 1}, {1, 0}}};
    if (name == "Y")
        return Matrix2{{{0, -i}, {i, 0}}};
    if (name == "Z")
        return Matrix2{{{1, 0}, {0, -1}}};
    if (name == "S")
        return Matrix2{{{1, 0}, {0, i}}};
    if (name == "T")
        return Matrix2{{{1, 0}, {0, std::polar(1.0, std::numbers::pi / 4)}}};
    return std::nullopt;
}

bool is_channel(OpKind k) {
    switch (k) {
    case OpKind::Dephase1:
    case OpKind::Dephase2:
    case OpKind::Depol1:
    case OpKind::Depol2:
    case OpKind::Damp:
    case OpKind::Kraus:
    case OpKind::Expect:
    case OpKind::PartialTrace: return true;
    default: return false;
    }
}

Instruction parse_instruction(LineParser& p, const std::string& head) {
    Instruction ins;
    ins.name = head;

    std::string name = head;
    if (name == "ctrl") {
        const std::string& list = p.next("control list");
        std::stringstream ss(list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            int c = 0;
            auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), c);
            if (ec != std::errc() || ptr != item.data() + item.size())
                p.fail("bad control list '" + list + "'");
            ins.ctrls.push_back(c);
        }
        name = p.next("gate after control list");
        ins.name = "ctrl " + name;
        if (!named_gate(name) && name != "RZ" && name != "u")
            p.fail("gate '" + name + "' cannot be controlled");
    }

    if (auto g = named_gate(name)) {
        ins.kind = OpKind::Gate;
        ins.gate = *g;
        ins.targets = {p.qubit()};
    } else if (name == "RZ") {
        ins.kind = OpKind::Gate;
        ins.targets = {p.qubit()};
        ins.param = p.real("angle");
        ins.gate = Matrix2{{{std::polar(1.0, -ins.param / 2), 0}, {0, std::polar(1.0, ins.param / 2)}}};
    } else if (name == "CX" || name == "CZ") {
        ins.kind = OpKind::Gate;
        ins.gate = *named_gate(name.substr(1));
        ins.targets = {p.qubit()};
        ins.ctrls = {p.qubit()};
    } else if (name == "SWAP") {
        ins.kind = OpKind::Swap;
        ins.targets = p.qubits(2);
    } else if (name == "u") {
        ins.kind = OpKind::ManyTarget;
        const auto n = p.integer("target count");
        if (n < 1 || n > 8)
            p.fail("target count must lie in [1, 8]");
        ins.targets = p.qubits(n);
        ins.matrix = p.matrix(static_cast<int>(n));
    } else if (name == "pauli" || name == "gadget") {
        ins.kind = name == "pauli" ? OpKind::PauliTensor : OpKind::PauliGadget;
        if (name == "gadget")
            ins.param = p.real("angle");
        ins.paulis = p.paulis(p.next("Pauli codes"), false);
        ins.targets = p.qubits(ins.paulis.size());
    } else if (name == "phase") {
        ins.kind = OpKind::PhaseGadget;
        ins.param = p.real("angle");
        while (!p.done())
            ins.targets.push_back(p.qubit());
        if (ins.targets.empty())
            p.fail("phase gadget needs at least one target");
    } else if (name == "dephase1" || name == "depol1" || name == "damp") {
        ins.kind = name == "dephase1" ? OpKind::Dephase1 : name == "depol1" ? OpKind::Depol1 : OpKind::Damp;
        ins.targets = {p.qubit()};
        ins.param = p.real("probability");
    } else if (name == "dephase2" || name == "depol2") {
        ins.kind = name == "dephase2" ? OpKind::Dephase2 : OpKind::Depol2;
        ins.targets = p.qubits(2);
        ins.param = p.real("probability");
        if (ins.kind == OpKind::Depol2 && !(ins.param >= 0 && ins.param <= 15.0 / 16))
            p.fail("two-qubit depolarising probability must lie in [0, 15/16]");
    } else if (name == "kraus") {
        ins.kind = OpKind::Kraus;
        const auto n = p.integer("target count");
        if (n < 1 || n > 4)
            p.fail("Kraus target count must lie in [1, 4]");
        ins.targets = p.qubits(n);
        while (!p.done()) {
            if (p.next("':'") != ":")
                p.fail("Kraus operators must each start with ':'");
            ins.kraus.push_back(p.matrix(static_cast<int>(n)));
        }
        if (ins.kraus.empty())
            p.fail("Kraus map needs at least one operator");
    } else if (name == "randstate") {
        ins.kind = OpKind::RandState;
        const auto s = p.integer("seed");
        if (s < 0)
            p.fail("seed must be non-negative");
        ins.seed = static_cast<std::uint64_t>(s);
    } else if (name == "dump") {
        ins.kind = OpKind::Dump;
    } else if (name == "expect") {
        ins.kind = OpKind::Expect;
        while (!p.done()) {
            ins.observable.coeffs.push_back(p.real("coefficient"));
            const auto codes = p.paulis(p.next("Pauli string"), true);
            ins.paulis.insert(ins.paulis.end(), codes.begin(), codes.end());
            ins.targets.push_back(static_cast<int>(codes.size()));
        }
        if (ins.observable.coeffs.empty())
            p.fail("expect needs at least one term");
        ins.observable.codes = ins.paulis;
    } else if (name == "ptrace") {
        ins.kind = OpKind::PartialTrace;
        while (!p.done())
            ins.targets.push_back(p.qubit());
        if (ins.targets.empty())
            p.fail("ptrace needs at least one qubit");
    } else {
        p.fail("unknown instruction '" + name + "'");
    }
    p.expect_end();

    if (!ins.ctrls.empty() && ins.kind == OpKind::ManyTarget)
        ins.name = "ctrl u";
    return ins;
}

void check_distinct(const Instruction& ins, int n) {
    std::set<int> seen;
    auto visit = [&](int q) {
        if (q < 0 || q >= n)
            throw ParseError(ins.line, "qubit " + std::to_string(q) + " is outside [0, " + std::to_string(n) + ")");
        if (!seen.insert(q).second)
            throw ParseError(ins.line, "qubit " + std::to_string(q) + " appears more than once");
    };
    for (int q : ins.targets)
        visit(q);
    for (int q : ins.ctrls)
        visit(q);
}

void validate_instruction(const Instruction& ins, Mode mode, int& n, int w, bool loose) {
    auto capacity = [&](const std::string& what) {
        throw CapacityError("line " + std::to_string(ins.line) + ": " + what);
    };
    if (mode == Mode::Statevector && is_channel(ins.kind))
        throw ParseError(ins.line, "'" + ins.name + "' requires density mode");

    if (ins.kind == OpKind::Expect) {
        for (int len : ins.targets)
            if (len != n)
                throw ParseError(ins.line, "Pauli string of length " + std::to_string(len) + " does not match " +
                                               std::to_string(n) + " qubits");
        return;
    }
    if (ins.kind == OpKind::RandState || ins.kind == OpKind::Dump)
        return;
    check_distinct(ins, n);

    const int lam = mode == Mode::Statevector ? n - w : 2 * n - w;
    const int shift = mode == Mode::Statevector ? 0 : n;
    switch (ins.kind) {
    case OpKind::ManyTarget: {
        int local_ctrls = 0;
        for (int c : ins.ctrls)
            local_ctrls += c + shift < lam;
        if (static_cast<int>(ins.targets.size()) + local_ctrls > lam)
            capacity(std::to_string(ins.targets.size()) + " targets and " + std::to_string(local_ctrls) +
                     " local controls exceed the " + std::to_string(lam) + " local qubits per rank");
        break;
    }
    case OpKind::Kraus:
        if (2 * static_cast<int>(ins.targets.size()) > lam)
            capacity("a " + std::to_string(ins.targets.size()) + "-qubit Kraus map needs " +
                     std::to_string(2 * ins.targets.size()) + " local qubits but each rank has " +
                     std::to_string(lam));
        break;
    case OpKind::PartialTrace: {
        const int nt = static_cast<int>(ins.targets.size());
        const int bound = loose ? n - (w + 1) / 2 : n - w;
        if (nt > bound)
            capacity("cannot trace out " + std::to_string(nt) + " of " + std::to_string(n) + " qubits at w=" +
                     std::to_string(w) + "; at most " + std::to_string(bound) + " are supported");
        n -= nt;
        break;
    }
    default: break;
    }
}

// Uniform double in [-1, 1) from the top 53 bits.
double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-52 - 1.0;
}

std::vector<cplx> random_pure(int n, std::mt19937_64& rng) {
    std::vector<cplx> psi(pow2(n));
    double norm = 0;
    for (auto& a : psi) {
        const double re = unit(rng);
        const double im = unit(rng);
        a = {re, im};
        norm += re * re + im * im;
    }
    const double scale = 1 / std::sqrt(norm);
    for (auto& a : psi)
        a *= scale;
    return psi;
}

struct RankOutput {
    std::vector<std::vector<cplx>> dumps;
    std::vector<cplx> expectations;
};

std::vector<cplx> local_copy(const DistributedRegister& reg) {
    std::vector<cplx> out;
    out.reserve(reg.local_size());
    for (const auto& a : reg.amps())
        out.push_back(to_cplx(a));
    return out;
}

void execute_sv(const Instruction& ins, DistributedRegister& reg, RankOutput& out) {
    switch (ins.kind) {
    case OpKind::Gate:
        if (ins.ctrls.empty())
            dist_one_target(reg, ins.gate, ins.targets[0]);
        else
            dist_many_ctrl_one_target(reg, ins.ctrls, ins.gate, ins.targets[0]);
        break;
    case OpKind::ManyTarget: dist_many_target(reg, ins.matrix, ins.targets, ins.ctrls); break;
    case OpKind::Swap: dist_swap(reg, ins.targets[0], ins.targets[1]); break;
    case OpKind::PauliTensor: dist_pauli_tensor(reg, ins.paulis, ins.targets); break;
    case OpKind::PhaseGadget: dist_phase_gadget(reg, ins.targets, ins.param); break;
    case OpKind::PauliGadget: dist_pauli_gadget(reg, ins.paulis, ins.targets, ins.param); break;
    case OpKind::RandState: {
        std::mt19937_64 rng(ins.seed);
        const auto psi = random_pure(reg.num_qubits(), rng);
        reg.init([&](index_t i) { return psi[i]; });
        break;
    }
    case OpKind::Dump: out.dumps.push_back(local_copy(reg)); break;
    default: throw ParseError(ins.line, "'" + ins.name + "' requires density mode");
    }
}

void execute_dm(const Instruction& ins, std::optional<ChoiRegister>& rho, RankOutput& out, bool loose) {
    ChoiRegister& r = *rho;
    const auto& ts = ins.targets;
    switch (ins.kind) {
    case OpKind::Gate: dm_one_target(r, ins.ctrls, ins.gate, ts[0]); break;
    case OpKind::ManyTarget: dm_many_target_unitary(r, ins.matrix, ts, ins.ctrls); break;
    case OpKind::Swap: dm_swap(r, ts[0], ts[1]); break;
    case OpKind::PauliTensor: dm_pauli_tensor(r, ins.paulis, ts); break;
    case OpKind::PhaseGadget: dm_phase_gadget(r, ts, ins.param); break;
    case OpKind::PauliGadget: dm_pauli_gadget(r, ins.paulis, ts, ins.param); break;
    case OpKind::Dephase1: dephase_one(r, ts[0], ins.param); break;
    case OpKind::Dephase2: dephase_two(r, ts[0], ts[1], ins.param); break;
    case OpKind::Depol1: depolarise_one(r, ts[0], ins.param); break;
    case OpKind::Depol2: depolarise_two(r, std::min(ts[0], ts[1]), std::max(ts[0], ts[1]), ins.param); break;
    case OpKind::Damp: damping(r, ts[0], ins.param); break;
    case OpKind::Kraus: kraus_map(r, ins.kraus, ts); break;
    case OpKind::RandState: {
        std::mt19937_64 rng(ins.seed);
        constexpr int kMix = 3;
        std::vector<std::vector<cplx>> states;
        std::vector<double> weights;
        double total = 0;
        for (int m = 0; m < kMix; ++m) {
            states.push_back(random_pure(r.num_qubits(), rng));
            weights.push_back(unit(rng) + 1.0);
            total += weights.back();
        }
        r.init([&](index_t k, index_t l) {
            cplx v = 0;
            for (int m = 0; m < kMix; ++m)
                v += weights[m] / total * states[m][k] * std::conj(states[m][l]);
            return v;
        });
        break;
    }
    case OpKind::Dump: out.dumps.push_back(local_copy(r.vec())); break;
    case OpKind::Expect: out.expectations.push_back(pauli_string_expectation(r, ins.observable)); break;
    case OpKind::PartialTrace: rho.emplace(partial_trace(r, ts, loose)); break;
    }
}

} // namespace

void validate(const Program& prog, bool loose_partial_trace) {
    if (prog.num_qubits < prog.w)
        throw CapacityError("a " + std::to_string(prog.num_qubits) + "-qubit register cannot be split over 2^" +
                            std::to_string(prog.w) + " ranks");
    int n = prog.num_qubits;
    for (const auto& ins : prog.instructions)
        validate_instruction(ins, prog.mode, n, prog.w, loose_partial_trace);
}

Program parse(std::string_view text, bool loose_partial_trace) {
    Program prog;
    bool have_format = false;
    bool have_mode = false;
    bool have_qubits = false;
    bool have_world = false;
    int line_no = 0;

    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        Tokens toks = tokenize(line);
        if (toks.empty())
            continue;

        LineParser p(line_no, toks);
        const std::string head = p.next("instruction");
        const bool header_done = !prog.instructions.empty();
        auto header = [&](bool& seen) {
            if (header_done)
                p.fail("header line '" + head + "' after the first instruction");
            if (seen)
                p.fail("duplicate header line '" + head + "'");
            seen = true;
        };

        if (head == "format") {
            header(have_format);
            if (p.integer("format version") != 1)
                p.fail("unsupported format version");
        } else if (head == "mode") {
            header(have_mode);
            const std::string& m = p.next("mode");
            if (m == "sv" || m == "statevector")
                prog.mode = Mode::Statevector;
            else if (m == "density" || m == "dm")
                prog.mode = Mode::Density;
            else
                p.fail("unknown mode '" + m + "'");
        } else if (head == "qubits") {
            header(have_qubits);
            const auto n = p.integer("qubit count");
            if (n < 1 || n > 30)
                p.fail("qubit count must lie in [1, 30]");
            prog.num_qubits = static_cast<int>(n);
        } else if (head == "world") {
            header(have_world);
            const auto w = p.integer("world exponent");
            if (w < 0 || w > 16)
                p.fail("world exponent must lie in [0, 16]");
            prog.w = static_cast<int>(w);
        } else if (head == "seed") {
            if (header_done)
                p.fail("header line 'seed' after the first instruction");
            const auto s = p.integer("seed");
            if (s < 0)
                p.fail("seed must be non-negative");
            prog.seed = static_cast<std::uint64_t>(s);
        } else {
            if (!have_mode || !have_qubits || !have_world)
                p.fail("instructions must follow the mode, qubits and world header lines");
            Instruction ins = parse_instruction(p, head);
            ins.line = line_no;
            prog.instructions.push_back(std::move(ins));
            p.expect_end();
            continue;
        }
        p.expect_end();
    }
    if (!have_mode || !have_qubits || !have_world)
        throw ParseError(line_no, "missing header: mode, qubits and world are required");
    if (prog.mode == Mode::Density && 2 * prog.num_qubits > 30)
        throw ParseError(line_no, "density mode supports at most 15 qubits");
    validate(prog, loose_partial_trace);
    return prog;
}

Report run(const Program& prog, const RunOptions& opts) {
    validate(prog, opts.loose_partial_trace);

    WorldConfig cfg;
    cfg.w = prog.w;
    cfg.max_message = opts.max_message;
    cfg.threads_per_rank = opts.threads;

    auto world = run_world(cfg, [&](RankContext& ctx) {
        RankOutput out;
        std::optional<DistributedRegister> sv;
        std::optional<ChoiRegister> rho;
        if (prog.mode == Mode::Statevector) {
            sv.emplace(ctx, prog.num_qubits);
            sv->init_basis_state(0);
        } else {
            rho.emplace(ctx, prog.num_qubits);
            rho->init_basis_state(0);
        }
        for (const auto& ins : prog.instructions) {
            RankContext::Step step(ctx);
            try {
                if (sv)
                    execute_sv(ins, *sv, out);
                else
                    execute_dm(ins, rho, out, opts.loose_partial_trace);
            } catch (const CapacityError& e) {
                throw CapacityError("line " + std::to_string(ins.line) + ": " + e.what());
            } catch (const ArgumentError& e) {
                throw ParseError(ins.line, e.what());
            }
        }
        return out;
    });

    Report rep;
    rep.log = std::move(world.log);
    rep.stats = std::move(world.stats);

    const RankOutput& first = world.results.front();
    int n = prog.num_qubits;
    std::size_t dump_index = 0;
    for (const auto& ins : prog.instructions) {
        if (ins.kind == OpKind::PartialTrace)
            n -= static_cast<int>(ins.targets.size());
        if (ins.kind != OpKind::Dump)
            continue;
        Dump d;
        d.line = ins.line;
        d.mode = prog.mode;
        d.num_qubits = n;
        for (const auto& r : world.results)
            d.amps.insert(d.amps.end(), r.dumps[dump_index].begin(), r.dumps[dump_index].end());
        rep.dumps.push_back(std::move(d));
        ++dump_index;
    }
    rep.expectations = first.expectations;

    // Top-level op k (1-based) is instruction k - 1.
    std::map<std::uint64_t, std::set<std::uint64_t>> rounds;
    rep.ops.resize(prog.instructions.size());
    for (std::size_t k = 0; k < prog.instructions.size(); ++k) {
        rep.ops[k].line = prog.instructions[k].line;
        rep.ops[k].name = prog.instructions[k].name;
    }
    for (const auto& rec : rep.log) {
        if (rec.op == 0 || rec.op > rep.ops.size())
            continue;
        rounds[rec.op].insert(rec.round);
        if (rec.paradigm != Paradigm::Reduce)
            rep.ops[rec.op - 1].exchanged += rec.count;
    }
    for (const auto& [op, rs] : rounds)
        rep.ops[op - 1].rounds = rs.size();
    for (const auto& st : rep.stats)
        for (const auto& [op, writes] : st.writes_by_op)
            if (op >= 1 && op <= rep.ops.size())
                rep.ops[op - 1].writes += writes;
    return rep;
}

void write_dump(std::ostream& out, const Dump& dump, std::size_t ordinal) {
    out << "# dump " << ordinal << " line " << dump.line << " mode "
        << (dump.mode == Mode::Statevector ? "sv" : "density") << " qubits " << dump.num_qubits << '\n';
    char buf[96];
    for (std::size_t i = 0; i < dump.amps.size(); ++i) {
        // Adding 0.0 turns -0 into +0 so equal states print identically.
        std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", i, dump.amps[i].real() + 0.0,
                      dump.amps[i].imag() + 0.0);
        out << buf;
    }
}

} // namespace qdist::cli
