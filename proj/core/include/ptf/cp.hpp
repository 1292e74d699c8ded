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

#ifndef PTF_CP_HPP_
#define PTF_CP_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ptf/matrix.hpp"
#include "ptf/tensor_store.hpp"

namespace ptf {

// K-component CP factors: one non-negative (shape[m] x K) matrix per mode.
class FactorSet {
 public:
  FactorSet() = default;
  // Throws ConfigError unless every matrix is finite, non-negative and has
  // the same positive number of columns.
  explicit FactorSet(std::vector<Matrix> factors);

  std::size_t order() const { return factors_.size(); }
  std::size_t rank() const {
    return factors_.empty() ? 0 : static_cast<std::size_t>(factors_[0].cols());
  }
  Shape shape() const;

  const Matrix& factor(std::size_t mode) const { return factors_.at(mode); }
  const std::vector<Matrix>& factors() const { return factors_; }
  // Callers must keep entries finite and non-negative.
  Matrix& mutable_factor(std::size_t mode) { return factors_.at(mode); }

  void Validate() const;

 private:
  std::vector<Matrix> factors_;
};

// sum_k prod_m factor(m)(coord[m], k)
double Reconstruct(const FactorSet& f, std::span<const Index> coord);

// Closed-form sums of rank-one products over a masked region. `weights`
// holds one vector per mode; `region` (may be null for the whole tensor)
// restricts modes 0 and 1.
//
// RegionProductSums returns, for every row r of `mode`, the sum over region
// cells whose `mode` coordinate is r of prod_{m != mode} weights[m][c_m].
Vector RegionProductSums(std::span<const Vector> weights, std::size_t mode,
                         const CellMask* region);
// Sum over all region cells of prod_m weights[m][c_m].
double RegionProductTotal(std::span<const Vector> weights,
                          const CellMask* region);

// Sum of reconstructions over the region, O(sum_m shape[m] * K).
double TotalReconstruction(const FactorSet& f, const CellMask* region = nullptr);

// sum over cells of y log yhat - yhat - log y!. Returns -infinity when some
// stored count has a zero reconstruction.
double PoissonLogLikelihood(const FactorSet& f, const SparseCountTensor& t,
                            const CellMask* region = nullptr);

// sum over cells of y log(y / yhat) - y + yhat, with 0 log 0 = 0. Returns
// +infinity when some stored count has a zero reconstruction.
double GeneralizedKl(const SparseCountTensor& t, const FactorSet& f,
                     const CellMask* region = nullptr);

// sum over cells of (y - yhat)^2, using Gram products for the zero cells.
double SquaredError(const SparseCountTensor& t, const FactorSet& f,
                    const CellMask* region = nullptr);

// FactorSet files: "<stem>.manifest" plus one "<stem>_mode<m>.tsv" matrix
// per mode, all in `dir`. `labels_file` is recorded verbatim when non-empty.
void WriteFactorSet(const std::string& dir, const std::string& stem,
                    const FactorSet& f, const std::string& labels_file = "");

struct LoadedFactors {
  FactorSet factors;
  std::string labels_file;  // resolved against the manifest's directory
};
LoadedFactors ReadFactorSet(const std::string& manifest_path);

}  // namespace ptf

#endif  // PTF_CP_HPP_
