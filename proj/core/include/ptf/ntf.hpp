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

#ifndef PTF_NTF_HPP_
#define PTF_NTF_HPP_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

#include "ptf/cp.hpp"
#include "ptf/tensor_store.hpp"

namespace ptf {

enum class NtfCost {
  kKl,  // generalized KL divergence (Poisson maximum likelihood)
  kLs,  // squared Euclidean distance
};

std::string_view ToString(NtfCost cost);

struct NtfConfig {
  std::size_t rank = 50;
  std::size_t max_iterations = 500;
  double tolerance = 1e-5;  // on |delta objective| / |objective|
  std::uint64_t seed = 0;
  NtfCost cost = NtfCost::kKl;
  double epsilon_floor = 1e-12;
  std::vector<std::size_t> fixed_modes;

  void Validate(std::size_t order) const;
  bool IsFixed(std::size_t mode) const;
};

// Lee-Seung multiplicative updates of one mode, in place. Only stored
// entries enter the numerators; denominators come from column-sum (KL) or
// Gram (LS) products. Updated entries are floored at `epsilon_floor`. With
// `observed`, only observed cells contribute.
//
// NtfKlSweep throws InadmissibleZeroError when a stored count has a zero
// reconstruction. NtfLsSweep throws NumericalError when a row's
// denominator vanishes while its numerator does not.
void NtfKlSweep(FactorSet& f, const SparseCountTensor& t, std::size_t mode,
                double epsilon_floor = 1e-12,
                const CellMask* observed = nullptr);
void NtfLsSweep(FactorSet& f, const SparseCountTensor& t, std::size_t mode,
                double epsilon_floor = 1e-12,
                const CellMask* observed = nullptr);

double NtfObjective(const SparseCountTensor& t, const FactorSet& f,
                    NtfCost cost, const CellMask* observed = nullptr);

struct NtfTrace {
  double initial = 0.0;
  std::vector<double> objective;  // after each sweep
  std::size_t iterations = 0;
  bool converged = false;
};

struct NtfFit {
  FactorSet factors;
  NtfTrace trace;
};

// Uniform(0, 1) factors rescaled so the total reconstruction equals
// `target_mass` (left unscaled when either side is zero).
FactorSet InitNtfFactors(const Shape& shape, std::size_t rank,
                         std::uint64_t seed, double target_mass);

NtfFit FitNtf(const SparseCountTensor& t, const NtfConfig& config);
NtfFit FitNtf(const SparseCountTensor& t, const NtfConfig& config,
              FactorSet init, const CellMask* observed);

// Keeps every mode but the last (time) mode at the trained factors and
// fits time-step factors to the observed cells of `test`.
NtfFit InferHeldoutTimeFactorsNtf(const FactorSet& trained,
                                  const SparseCountTensor& test,
                                  const CellMask& observed,
                                  const NtfConfig& config);

// Header plus one "iteration<TAB>objective" row per sweep.
void WriteObjectiveTrace(std::ostream& out, const NtfTrace& trace);

}  // namespace ptf

#endif  // PTF_NTF_HPP_
