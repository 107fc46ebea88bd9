// Copyright 2026 The qdist Authors
// SPDX-License-Identifier: Apache-2.0

// Runs a circuit file on an in-process world of 2^w ranks and writes the
// dumped amplitudes, expectation values and communication trace.

#include "qdist/circuit.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum ExitCode { kOk = 0, kParse = 2, kCapacity = 3, kProtocol = 4 };

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_stats(std::ostream& out, const qdist::cli::Report& rep) {
    out << "# line op rounds exchanged writes\n";
    for (const auto& op : rep.ops)
        out << op.line << ' ' << op.name << ' ' << op.rounds << ' ' << op.exchanged << ' ' << op.writes << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed quantum circuit runner"};
    std::string circuit_path;
    std::string trace_path;
    std::string dump_path;
    std::string stats_path;
    unsigned threads = 1;
    qdist::index_t max_message = qdist::pow2(20);
    bool loose = false;
    int world = -1;

    app.add_option("--circuit", circuit_path, "Circuit file")->required();
    app.add_option("--trace", trace_path, "Write the communication log as JSON lines");
    app.add_option("--dump", dump_path, "Write dumped amplitudes here instead of stdout");
    app.add_option("--threads", threads, "Threads per rank")->check(CLI::Range(1u, 256u));
    app.add_option("--max-message", max_message, "Amplitudes per physical message")
        ->check(CLI::Range(qdist::index_t{1}, qdist::pow2(40)));
    app.add_option("--world", world, "Override the circuit's world exponent")->check(CLI::Range(0, 16));
    app.add_option("--stats", stats_path, "Write per-instruction counters");
    app.add_flag("--loose-partial-trace", loose,
                 "Allow tracing up to N - ceil(w/2) qubits; the result may have fewer qubits than w");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kParse;
    }

    try {
        qdist::cli::Program prog = qdist::cli::parse(read_file(circuit_path), loose);
        if (world >= 0) {
            prog.w = world;
            qdist::cli::validate(prog, loose);
        }
        qdist::cli::RunOptions opts;
        opts.threads = threads;
        opts.max_message = max_message;
        opts.loose_partial_trace = loose;
        const qdist::cli::Report rep = qdist::cli::run(prog, opts);

        std::ofstream dump_file;
        if (!dump_path.empty()) {
            dump_file.open(dump_path, std::ios::binary);
            if (!dump_file)
                throw std::runtime_error("cannot write " + dump_path);
        }
        std::ostream& dump_out = dump_path.empty() ? std::cout : dump_file;
        for (std::size_t k = 0; k < rep.dumps.size(); ++k)
            qdist::cli::write_dump(dump_out, rep.dumps[k], k);

        char buf[96];
        for (const auto& e : rep.expectations) {
            std::snprintf(buf, sizeof buf, "expect %.17g %.17g\n", e.real() + 0.0, e.imag() + 0.0);
            std::cout << buf;
        }

        if (!trace_path.empty()) {
            std::ofstream trace(trace_path, std::ios::binary);
            if (!trace)
                throw std::runtime_error("cannot write " + trace_path);
            qdist::write_jsonl(trace, rep.log);
        }
        if (!stats_path.empty()) {
            std::ofstream stats(stats_path);
            write_stats(stats, rep);
        }
        return kOk;
    } catch (const qdist::cli::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const qdist::ArgumentError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const qdist::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return kCapacity;
    } catch (const qdist::ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << '\n';
        return kProtocol;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParse;
    }
}
