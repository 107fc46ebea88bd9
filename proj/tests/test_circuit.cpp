// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdist/circuit.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qdist;
using namespace qdist::cli;

namespace {

std::string dump_text(const Report& rep) {
    std::ostringstream out;
    for (std::size_t k = 0; k < rep.dumps.size(); ++k)
        write_dump(out, rep.dumps[k], k);
    return out.str();
}

int parse_line_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(QDIST_RUN_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path;
}

} // namespace

TEST_CASE("parsing a Bell circuit") {
    const Program prog = parse("mode sv\nqubits 2\nworld 1\nH 0\nCX 1 0\ndump");
    CHECK(prog.mode == Mode::Statevector);
    CHECK(prog.num_qubits == 2);
    CHECK(prog.w == 1);
    REQUIRE(prog.instructions.size() == 3);
    CHECK(prog.instructions[1].kind == OpKind::Gate);
    CHECK(prog.instructions[1].targets == std::vector<int>{1});
    CHECK(prog.instructions[1].ctrls == std::vector<int>{0});
    CHECK(prog.instructions[2].kind == OpKind::Dump);
}

TEST_CASE("parse errors carry the line number") {
    CHECK(parse_line_of("mode sv\nqubits 2\nworld 0\ndepol1 0 0.1\n") == 4);
    CHECK(parse_line_of("mode density\nqubits 2\nworld 0\nu 1 0 1 0 ; 0 1 ; 1 1\n") == 4);
    CHECK(parse_line_of("mode sv\nqubits 2\nworld 0\nu 2 0 1 1 0 0 0 ; 0 1 0 0\n") == 4);
    CHECK(parse_line_of("mode sv\nqubits 2\nworld 0\nFOO 1\n") == 4);
    CHECK(parse_line_of("mode sv\nqubits 2\nworld 0\nH\n") == 4);
    CHECK(parse_line_of("mode sv\nqubits 2\nworld 0\nH 0 1\n") == 4);
    CHECK(parse_line_of("mode sv\nqubits 2\nworld 0\nCX 1 1\n") == 4);
    CHECK(parse_line_of("mode sv\nqubits 2\nworld 0\nH 2\n") == 4);
    CHECK(parse_line_of("format 2\nmode sv\nqubits 2\nworld 0\n") == 1);
    CHECK(parse_line_of("mode sv\nH 0\n") == 2);
}

TEST_CASE("capacity violations are reported before running") {
    CHECK_THROWS_AS(parse("mode sv\nqubits 2\nworld 3\nH 0\n"), CapacityError);
    CHECK_THROWS_AS(parse("mode sv\nqubits 4\nworld 2\nu 3 0 1 2 " + std::string(
                              "1 0 0 0 0 0 0 0 ; 0 1 0 0 0 0 0 0 ; 0 0 1 0 0 0 0 0 ; 0 0 0 1 0 0 0 0 ; "
                              "0 0 0 0 1 0 0 0 ; 0 0 0 0 0 1 0 0 ; 0 0 0 0 0 0 1 0 ; 0 0 0 0 0 0 0 1\n")),
                    CapacityError);
    CHECK_THROWS_AS(parse("mode density\nqubits 3\nworld 2\nptrace 0 1\n"), CapacityError);
    CHECK_NOTHROW(parse("mode density\nqubits 3\nworld 2\nptrace 0 1\n", true));
}

TEST_CASE("Bell state amplitudes do not depend on the world size") {
    const std::string body = "format 1\nmode sv\nqubits 2\nworld 0\nH 0\nCX 1 0\ndump\n";
    Program prog = parse(body);
    const Report base = run(prog);
    REQUIRE(base.dumps.size() == 1);
    const auto& a = base.dumps[0].amps;
    CHECK(std::abs(a[0] - cplx(1 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(a[1] == cplx(0, 0));
    CHECK(a[2] == cplx(0, 0));
    CHECK(std::abs(a[3] - cplx(1 / std::sqrt(2.0), 0)) < 1e-15);
    for (int w = 1; w <= 2; ++w) {
        prog.w = w;
        CHECK(dump_text(run(prog)) == dump_text(base));
    }
}

TEST_CASE("per-instruction counters") {
    Program prog = parse("mode sv\nqubits 5\nworld 3\nH 0\nCX 1 0\nCX 2 1\nCX 3 2\nCX 4 3\ndump\n");
    const Report rep = run(prog);
    REQUIRE(rep.ops.size() == 6);
    CHECK(rep.ops[0].exchanged == 0);
    CHECK(rep.ops[1].exchanged == 0);
    // CX 2 1: target 2 is a prefix qubit, control 1 local; half of each
    // rank's amplitudes move.
    CHECK(rep.ops[2].exchanged == pow2(5) / 2);
    CHECK(rep.ops[2].rounds == 1);
    // Prefix control and prefix target: only ranks with the control set.
    CHECK(rep.ops[3].exchanged == pow2(5) / 2);
    CHECK(rep.ops[4].exchanged == pow2(5) / 2);
    CHECK(rep.ops[2].writes > 0);
}

TEST_CASE("density programs run channels, expectations and partial traces") {
    const std::string body =
        "mode density\nqubits 3\nworld 1\nrandstate 7\ndepol1 2 0.1\ndamp 0 0.2\n"
        "kraus 1 1 : 1 0 ; 0 0.8 : 0 0.6 ; 0 0\n"
        "expect 1 III\nexpect 0.5 ZIX 0.5 ZIX\nptrace 2\ndump\nexpect 1 II\n";
    const Report rep = run(parse(body));
    REQUIRE(rep.expectations.size() == 3);
    CHECK(std::abs(rep.expectations[0] - cplx(1, 0)) < 1e-12);
    CHECK(std::abs(rep.expectations[1].imag()) < 1e-12);
    CHECK(std::abs(rep.expectations[2] - cplx(1, 0)) < 1e-12);
    REQUIRE(rep.dumps.size() == 1);
    CHECK(rep.dumps[0].num_qubits == 2);
    CHECK(rep.dumps[0].amps.size() == 16);
}

TEST_CASE("seeded random states are reproducible across worlds") {
    Program prog = parse("mode sv\nqubits 4\nworld 0\nrandstate 42\ndump\n");
    const std::string base = dump_text(run(prog));
    prog.w = 3;
    CHECK(dump_text(run(prog)) == base);
    double norm = 0;
    const Report rep = run(prog);
    for (const cplx& a : rep.dumps[0].amps)
        norm += std::norm(a);
    CHECK(std::abs(norm - 1) < 1e-12);
}

TEST_CASE("dump lines carry 17 significant digits") {
    std::ostringstream out;
    Dump d;
    d.amps = {cplx(1 / 3.0, -0.0), cplx(0, 0)};
    write_dump(out, d, 0);
    CHECK(out.str() == "# dump 0 line 0 mode sv qubits 0\n0 0.33333333333333331 0\n1 0 0\n");
}

TEST_CASE("the runner tool reports exit codes") {
    const auto good = temp_file("qdist_good.qc", "format 1\nmode sv\nqubits 2\nworld 1\nH 0\nCX 1 0\ndump\n");
    const auto bad = temp_file("qdist_bad.qc", "mode sv\nqubits 2\nworld 1\nQQ 0\n");
    const auto dump = std::filesystem::temp_directory_path() / "qdist_good.dump";
    CHECK(run_tool("--circuit " + good.string() + " --dump " + dump.string()) == 0);
    CHECK(std::filesystem::file_size(dump) > 0);
    CHECK(run_tool("--circuit " + bad.string()) == 2);
    CHECK(run_tool("--circuit " + good.string() + " --world 3") == 3);
    CHECK(run_tool("--circuit " + good.string() + " --max-message 1 --threads 2") == 0);
}
