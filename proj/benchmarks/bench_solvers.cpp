// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "prolite/engine.hpp"
#include "prolite/harness.hpp"
#include "prolite/orchestrator.hpp"
#include "prolite/reader.hpp"

using namespace prolite;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void BM_FourDigitPuzzle(benchmark::State& state) {
    const Database db = consult(parse_program(read_file(std::string(PROLITE_DATA_DIR) + "/programs/four_digit.pl")));
    for (auto _ : state) benchmark::DoNotOptimize(solve_all(db, "problem(N)"));
}
BENCHMARK(BM_FourDigitPuzzle)->Unit(benchmark::kMillisecond);

// N-queens by labeling; the argument is the board size.
void BM_QueensLabeling(benchmark::State& state) {
    const Database db = consult(parse_program(
        "queens(N, Qs) :- length(Qs, N), Qs ins 1..N, safe(Qs), label(Qs).\n"
        "safe([]).\n"
        "safe([Q|Qs]) :- no_attack(Q, Qs, 1), safe(Qs).\n"
        "no_attack(_, [], _).\n"
        "no_attack(Q, [Q1|Qs], D) :- Q #\\= Q1, abs(Q - Q1) #\\= D, D1 is D + 1, no_attack(Q, Qs, D1).\n"));
    const std::string query = "queens(" + std::to_string(state.range(0)) + ", Qs)";
    for (auto _ : state) benchmark::DoNotOptimize(solve_all(db, query, 1));
}
BENCHMARK(BM_QueensLabeling)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

// Dense n x n rational system through the constraint store.
void BM_RationalSystem(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    std::string block, args;
    for (int r = 0; r < n; ++r) {
        std::string row;
        for (int c = 0; c < n; ++c) {
            const int k = (r == c) ? n + 1 : ((r * 7 + c * 3) % 5) - 2;
            row += (c ? " + " : "") + std::to_string(k) + " * X" + std::to_string(c);
        }
        block += (r ? ", " : "") + row + " = " + std::to_string(r + 1);
    }
    for (int c = 0; c < n; ++c) args += (c ? ", " : "") + std::string("X") + std::to_string(c);
    const Database db = consult(parse_program("sys(" + args + ") :- {" + block + "}.\n"));
    const std::string query = "sys(" + args + ")";
    for (auto _ : state) benchmark::DoNotOptimize(solve_all(db, query));
}
BENCHMARK(BM_RationalSystem)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_NavigateCandidate(benchmark::State& state) {
    const auto problems = gen_navigate(7, 64);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& p = problems[i++ % problems.size()];
        benchmark::DoNotOptimize(run_candidate(navigate_program(p.steps)));
    }
}
BENCHMARK(BM_NavigateCandidate)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
