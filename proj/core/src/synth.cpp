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

#include "ptf/synth.hpp"

#include <cmath>
#include <random>

#include "ptf/error.hpp"

namespace ptf {

void SynthConfig::Validate() const {
  if (shape.empty()) throw ConfigError("shape must have at least one mode");
  for (Index n : shape) {
    if (n == 0) throw ConfigError("mode sizes must be positive");
  }
  if (rank == 0) throw ConfigError("rank must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be positive and finite");
  }
  if (!beta.empty() && beta.size() != shape.size()) {
    throw ConfigError("expected one beta per mode");
  }
  for (double b : beta) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw ConfigError("beta must be positive and finite");
    }
  }
}

std::vector<double> SynthConfig::ResolvedBeta() const {
  return beta.empty() ? std::vector<double>(shape.size(), 1.0) : beta;
}

SynthSample SampleGenerative(const SynthConfig& cfg) {
  cfg.Validate();
  const std::vector<double> beta = cfg.ResolvedBeta();
  const std::size_t order = cfg.shape.size();
  const auto k_count = static_cast<Eigen::Index>(cfg.rank);
  std::mt19937_64 rng(cfg.seed);

  std::vector<Matrix> factors;
  for (std::size_t m = 0; m < order; ++m) {
    std::gamma_distribution<double> prior(cfg.alpha,
                                          1.0 / (cfg.alpha * beta[m]));
    Matrix a(static_cast<Eigen::Index>(cfg.shape[m]), k_count);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index k = 0; k < k_count; ++k) a(i, k) = prior(rng);
    }
    factors.push_back(std::move(a));
  }

  std::vector<Index> coords;
  std::vector<Count> counts;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    double mass = 1.0;
    std::vector<std::discrete_distribution<Index>> pick;
    for (std::size_t m = 0; m < order; ++m) {
      const Vector col = factors[m].col(k);
      mass *= col.sum();
      pick.emplace_back(col.data(), col.data() + col.size());
    }
    if (!(mass > 0.0)) continue;
    std::poisson_distribution<std::uint64_t> total(mass);
    const std::uint64_t events = total(rng);
    for (std::uint64_t e = 0; e < events; ++e) {
      for (std::size_t m = 0; m < order; ++m) coords.push_back(pick[m](rng));
      counts.push_back(1);
    }
  }
  return {SparseCountTensor::FromSummedEntries(cfg.shape, std::move(coords),
                                               std::move(counts)),
          FactorSet(std::move(factors))};
}

double ExpectedTotal(const SynthConfig& cfg) {
  cfg.Validate();
  const std::vector<double> beta = cfg.ResolvedBeta();
  double total = static_cast<double>(cfg.rank);
  for (std::size_t m = 0; m < cfg.shape.size(); ++m) {
    total *= static_cast<double>(cfg.shape[m]) / beta[m];
  }
  return total;
}

}  // namespace ptf
