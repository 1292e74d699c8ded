// Copyright 2026 The ptf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "ptf/bptf.hpp"
#include "ptf/eval.hpp"
#include "ptf/ntf.hpp"
#include "ptf/synth.hpp"

namespace ptf {
namespace {

SparseCountTensor Data() {
  SynthConfig sc;
  sc.shape = {60, 60, 10, 50};
  sc.rank = 5;
  sc.beta = {3, 3, 3, 3};
  sc.seed = 1;
  return SampleGenerative(sc).tensor;
}

void BM_BptfSweep(benchmark::State& state) {
  const SparseCountTensor t = Data();
  const auto rank = static_cast<std::size_t>(state.range(0));
  FitConfig cfg;
  cfg.rank = rank;
  const Hyperparameters h = Hyperparameters::Default(4);
  VariationalState s = InitState(t.shape(), cfg, h);
  for (auto _ : state) {
    for (std::size_t m = 0; m < 4; ++m) {
      UpdateGamma(s, t, m, h);
      UpdateDelta(s, m, h);
    }
    benchmark::DoNotOptimize(ComputeElbo(s, t, h));
  }
  state.counters["nnz"] = static_cast<double>(t.nnz());
}
BENCHMARK(BM_BptfSweep)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_NtfSweep(benchmark::State& state) {
  const SparseCountTensor t = Data();
  const auto rank = static_cast<std::size_t>(state.range(0));
  const bool kl = state.range(1) == 0;
  FactorSet f = InitNtfFactors(t.shape(), rank, 0, static_cast<double>(t.total()));
  for (auto _ : state) {
    for (std::size_t m = 0; m < 4; ++m) {
      if (kl) {
        NtfKlSweep(f, t, m);
      } else {
        NtfLsSweep(f, t, m);
      }
    }
  }
  state.SetLabel(kl ? "kl" : "ls");
}
BENCHMARK(BM_NtfSweep)->Args({10, 0})->Args({10, 1})->Args({50, 0})->Args({50, 1})
    ->Unit(benchmark::kMillisecond);

void BM_EvaluateRegion(benchmark::State& state) {
  const SparseCountTensor t = Data();
  const FactorSet f = InitNtfFactors(t.shape(), 20, 0, static_cast<double>(t.total()));
  const CellMask region = CellMask::TopBlock(25, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(EvaluateRegion(f, t, region).metrics.mae);
  }
}
BENCHMARK(BM_EvaluateRegion)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ptf

BENCHMARK_MAIN();
