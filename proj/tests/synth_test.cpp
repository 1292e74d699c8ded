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

#include <cmath>

#include <gtest/gtest.h>

#include "ptf/error.hpp"
#include "ptf/synth.hpp"

namespace ptf {
namespace {

TEST(Synth, DeterministicPerSeed) {
  SynthConfig cfg;
  cfg.shape = {10, 10, 3, 8};
  cfg.seed = 4;
  const SynthSample a = SampleGenerative(cfg), b = SampleGenerative(cfg);
  EXPECT_EQ(a.tensor, b.tensor);
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_EQ(a.truth.factor(m), b.truth.factor(m));
  }
  cfg.seed = 5;
  EXPECT_FALSE(SampleGenerative(cfg).tensor == a.tensor);
}

TEST(Synth, SparseWithSmallShape) {
  SynthConfig cfg;
  cfg.shape = {20, 20, 5, 30};
  const SynthSample s = SampleGenerative(cfg);
  EXPECT_EQ(s.tensor.shape(), cfg.shape);
  EXPECT_EQ(s.truth.rank(), 5u);
  EXPECT_LT(Density(s.tensor), 0.5);
}

TEST(Synth, MeanTotalMatchesExpectation) {
  SynthConfig cfg;
  cfg.shape = {4, 4, 2, 3};
  cfg.rank = 2;
  cfg.alpha = 2.0;
  cfg.beta = {1.0, 0.5, 2.0, 1.0};
  const double expected = ExpectedTotal(cfg);
  EXPECT_DOUBLE_EQ(expected, 2.0 * 4 * 4 * 2 * 3 / (1.0 * 0.5 * 2.0 * 1.0));
  const int draws = 400;
  double sum = 0, sum_sq = 0;
  for (int s = 0; s < draws; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    const double total = static_cast<double>(SampleGenerative(cfg).tensor.total());
    sum += total;
    sum_sq += total * total;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
  EXPECT_LT(std::abs(mean - expected), 4 * se);
}

TEST(Synth, RejectsBadConfig) {
  SynthConfig cfg;
  cfg.rank = 0;
  EXPECT_THROW(SampleGenerative(cfg), ConfigError);
  cfg.rank = 2;
  cfg.beta = {1, 1};
  EXPECT_THROW(SampleGenerative(cfg), ConfigError);
  cfg.beta.clear();
  cfg.alpha = 0;
  EXPECT_THROW(SampleGenerative(cfg), ConfigError);
}

}  // namespace
}  // namespace ptf
