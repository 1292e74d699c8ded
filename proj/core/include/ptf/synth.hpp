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

#ifndef PTF_SYNTH_HPP_
#define PTF_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "ptf/cp.hpp"
#include "ptf/tensor_store.hpp"

namespace ptf {

struct SynthConfig {
  Shape shape = {30, 30, 5, 40};
  std::size_t rank = 5;
  double alpha = 0.1;
  std::vector<double> beta;  // empty: 1 for every mode
  std::uint64_t seed = 0;

  void Validate() const;
  std::vector<double> ResolvedBeta() const;
};

struct SynthSample {
  SparseCountTensor tensor;
  FactorSet truth;
};

// Factors from Gamma(alpha, rate alpha * beta[m]); counts from
// Poisson(sum_k prod_m theta). Sampled per component as a Poisson total
// scattered over cells by independent per-mode categorical draws, which
// has the same law as independent cell-wise Poisson draws.
SynthSample SampleGenerative(const SynthConfig& cfg);

// E[total count] = K * prod_m shape[m] / beta[m].
double ExpectedTotal(const SynthConfig& cfg);

}  // namespace ptf

#endif  // PTF_SYNTH_HPP_
