// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file circuit.hpp
 * @brief Line-oriented circuit files: parsing, validation and execution on
 * the in-process world.
 *
 * A file starts with header lines (`format 1`, `mode sv|density`,
 * `qubits N`, `world w`, optional `seed s`) followed by one instruction per
 * line. `#` starts a comment. See README.md for the instruction set.
 */

#pragma once

#include "qdist/transport.hpp"
#include "qdist/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdist::cli {

class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

enum class Mode { Statevector, Density };

enum class OpKind {
    Gate,        ///< one target, optional controls
    ManyTarget,  ///< dense 2^n matrix, optional controls
    Swap,
    PauliTensor,
    PhaseGadget,
    PauliGadget,
    Dephase1,
    Dephase2,
    Depol1,
    Depol2,
    Damp,
    Kraus,
    RandState,
    Dump,
    Expect,
    PartialTrace,
};

struct Instruction {
    OpKind kind = OpKind::Gate;
    int line = 0;
    std::string name;
    std::vector<int> targets; ///< for Expect, the length of each Pauli string
    std::vector<int> ctrls;
    Matrix2 gate = Matrix2::identity();
    MatrixN matrix;
    std::vector<MatrixN> kraus;
    std::vector<Pauli> paulis;
    PauliString observable;
    double param = 0;
    std::uint64_t seed = 0;
};

struct Program {
    int format = 1;
    Mode mode = Mode::Statevector;
    int num_qubits = 0;
    int w = 0;
    std::optional<std::uint64_t> seed;
    std::vector<Instruction> instructions;
};

/// Parses and validates a circuit, including capacity preconditions.
/// Throws ParseError for malformed input and CapacityError (with the line
/// number) when an instruction cannot run at the requested world size.
Program parse(std::string_view text, bool loose_partial_trace = false);

/// Re-checks capacity preconditions of an already parsed program.
void validate(const Program& prog, bool loose_partial_trace = false);

struct RunOptions {
    unsigned threads = 1;
    index_t max_message = pow2(20);
    bool loose_partial_trace = false;
};

struct Dump {
    int line = 0;
    Mode mode = Mode::Statevector;
    int num_qubits = 0; ///< of the state, not of the Choi register
    std::vector<cplx> amps;
};

struct OpCounters {
    int line = 0;
    std::string name;
    std::uint64_t rounds = 0;
    index_t exchanged = 0; ///< amplitudes sent by all ranks, excluding reductions
    index_t writes = 0;    ///< amplitude writes summed over ranks
};

struct Report {
    std::vector<Dump> dumps;
    std::vector<cplx> expectations;
    std::vector<CommRecord> log;
    std::vector<RankStats> stats;
    std::vector<OpCounters> ops;
};

Report run(const Program& prog, const RunOptions& opts = {});

/// "index re im" per amplitude with 17 significant digits, preceded by a
/// "# dump" comment line.
void write_dump(std::ostream& out, const Dump& dump, std::size_t ordinal);

} // namespace qdist::cli
