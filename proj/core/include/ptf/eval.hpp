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

#ifndef PTF_EVAL_HPP_
#define PTF_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptf/bptf.hpp"
#include "ptf/cp.hpp"
#include "ptf/ntf.hpp"
#include "ptf/tensor_store.hpp"

namespace ptf {

enum class ModelKind { kBptfGeo, kBptfAri, kNtfKl, kNtfLs };

std::string_view ToString(ModelKind model);
std::optional<ModelKind> ParseModelKind(std::string_view text);

// Mean |prediction - truth| over all cells. Throws on an empty region.
double Mae(std::span<const double> predictions, std::span<const double> truth);
// Mean absolute error over cells with truth > 0; nullopt when there are none.
std::optional<double> MaeNz(std::span<const double> predictions,
                            std::span<const double> truth);
// Fraction of zero-truth cells predicted strictly above 0.5; nullopt when
// there are no zero cells.
std::optional<double> HamZ(std::span<const double> predictions,
                           std::span<const double> truth);

struct Metrics {
  double mae = 0.0;
  std::optional<double> mae_nz;
  std::optional<double> ham_z;
};

struct RegionMetrics {
  Metrics metrics;
  double cells = 0;
  double nonzero_cells = 0;
  double abs_error_nonzero = 0;  // sum over non-zero cells
  double abs_prediction_zero = 0;  // sum of |yhat| over zero cells
};

// Streams over every cell of `region` (zeros included) without
// materializing the tensor, one mode-0 x mode-1 slab per trailing index.
RegionMetrics EvaluateRegion(const FactorSet& f, const SparseCountTensor& truth,
                             const CellMask& region);

struct ExperimentSpec {
  std::string dataset = "synthetic";
  std::size_t n_prime = 25;
  // true: observe the top block and predict its complement;
  // false: observe the complement and predict the top block.
  bool predict_complement = false;
  double test_fraction = 0.2;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::size_t rank = 50;
  std::vector<ModelKind> models = {ModelKind::kNtfLs, ModelKind::kNtfKl,
                                   ModelKind::kBptfGeo, ModelKind::kBptfAri};
  FitConfig bptf;
  NtfConfig ntf;
  double alpha = 0.1;
  std::size_t threads = 1;

  void Validate(const Shape& shape) const;
  // e.g. "I-top-25" or "I-top-25^c"
  std::string ScenarioName() const;
  CellMask HeldoutRegion() const;
};

struct SplitStats {
  std::uint64_t seed = 0;
  double density = 0;
  std::optional<double> vmr;
  double heldout_cells = 0;
  std::size_t heldout_nonzeros = 0;
};

struct ModelResult {
  ModelKind model = ModelKind::kBptfGeo;
  std::vector<std::optional<Metrics>> per_split;  // nullopt: the run failed
  std::vector<std::string> errors;
  std::optional<Metrics> mean;  // averaged over successful splits
};

struct EvalReport {
  std::string scenario;
  std::vector<SplitStats> splits;
  double density = 0;         // averaged over splits
  std::optional<double> vmr;  // averaged over splits where defined
  std::vector<ModelResult> models;

  const ModelResult* Find(ModelKind model) const;
};

// Sorts actors by activity, then for every seed: splits time steps, fits
// each model on the training steps, infers test time factors from the
// observed region and scores the held-out region. A failing model is
// recorded in its result and the remaining models still run.
EvalReport RunExperiment(const ExperimentSpec& spec, const SparseCountTensor& t);

// One row per scenario x model.
void WriteReportTsv(std::ostream& out, std::span<const EvalReport> reports);
// One row per scenario: density, VMR, then MAE, MAE-NZ, HAM-Z per model.
void WriteReportTable(std::ostream& out, std::span<const EvalReport> reports);
void WriteReportJson(std::ostream& out, std::span<const EvalReport> reports);

}  // namespace ptf

#endif  // PTF_EVAL_HPP_
