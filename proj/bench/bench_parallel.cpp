// Copyright 2026 The qcbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference vs OpenMP kernels. Argument 0 is Exec::Serial and 1 is
// Exec::Parallel; both produce bit-identical results.

#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "qcbridge/cloning.hpp"
#include "qcbridge/distill.hpp"
#include "qcbridge/qkd.hpp"
#include "qcbridge/weakmeas.hpp"

namespace {

using namespace qcb;

Exec exec_of(const benchmark::State &state) {
    return state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
}

void BM_BirthProcess(benchmark::State &state) {
    McOptions opt;
    opt.trials = 200'000;
    opt.exec = exec_of(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cloning::birth_process_mc({2, 16}, opt));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opt.trials));
}

void BM_AdvantageMonteCarlo(benchmark::State &state) {
    const auto table = qkd::symbol_distribution({0.2}, qkd::Basis::Z);
    McOptions opt;
    opt.trials = 100'000;
    opt.exec = exec_of(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(distill::ad_monte_carlo(table, 6, opt));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opt.trials));
}

void BM_EquivalenceSweep(benchmark::State &state) {
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) {
        grid.push_back(k / 100.0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(distill::equivalence_sweep(
            grid, 30, qkd::EveMeasurement::HelstromBinary, exec_of(state)));
    }
}

void BM_ToaSweep(benchmark::State &state) {
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) {
        grid.push_back(std::pow(10.0, -3.0 + 0.1 * k));
    }
    const auto pre = weak::polarization(std::numbers::pi / 4);
    const std::optional<weak::PostSelection> post =
        weak::Analyzer{weak::polarization(-std::numbers::pi / 4 + 0.3)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            weak::toa_transition_sweep(pre, 0.0, post, grid, 1.0, exec_of(state)));
    }
}

} // namespace

BENCHMARK(BM_BirthProcess)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdvantageMonteCarlo)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EquivalenceSweep)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ToaSweep)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
