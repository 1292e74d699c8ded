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

#ifndef PTF_TESTS_SUPPORT_HPP_
#define PTF_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ptf/bptf.hpp"
#include "ptf/cp.hpp"
#include "ptf/tensor_store.hpp"

namespace ptf::testing {

// Every coordinate of `shape` in row-major order.
std::vector<std::vector<Index>> AllCells(const Shape& shape);

// Each cell is stored with probability `density`, count uniform in
// [1, max_count].
SparseCountTensor RandomTensor(const Shape& shape, double density,
                               Count max_count, std::mt19937_64& rng);

// Entries uniform in [lo, hi].
FactorSet RandomFactors(const Shape& shape, std::size_t rank,
                        std::mt19937_64& rng, double lo = 0.1,
                        double hi = 1.0);

VariationalState RandomState(const Shape& shape, std::size_t rank,
                             std::mt19937_64& rng);

// Count at `coord`, zero when absent. Linear scan.
double CountAt(const SparseCountTensor& t, const std::vector<Index>& coord);

// sum_k prod_m f.factor(m)(coord[m], k), written as explicit loops.
double LoopReconstruct(const FactorSet& f, const std::vector<Index>& coord);

bool InMask(const CellMask& mask, Index i, Index j);

// Digamma by Binet's second integral, evaluated with exp-sinh quadrature.
double QuadratureDigamma(double x);

// Shape update written from the latent-source view: each stored count is
// split over components in proportion to prod_m G, and each mode-`mode` row
// collects alpha plus its share. G is recomputed here from shape and rate
// with an independent digamma.
Matrix LatentSourceShapeOracle(const SparseCountTensor& t,
                               const VariationalState& s, std::size_t mode,
                               double alpha);

// Rate update by enumerating every cell of the tensor (optionally only the
// cells selected by `mask`) and adding prod_{m' != mode} E to its row.
Matrix DenseRateOracle(const Shape& shape, const VariationalState& s,
                       std::size_t mode, double prior_rate,
                       const CellMask* mask = nullptr);

// sum_i sum_j |v_i - v_j| / (2 n^2 mean(v)), O(n^2).
double PairwiseGini(const std::vector<double>& v);

// Fresh scratch directory under the system temp directory.
std::string ScratchDir(const std::string& name);

std::string ReadFile(const std::string& path);

}  // namespace ptf::testing

#endif  // PTF_TESTS_SUPPORT_HPP_
