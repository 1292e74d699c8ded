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

#include "ptf/cp.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include "ptf/error.hpp"
#include "ptf/matrix_io.hpp"

namespace ptf {
namespace {

struct MaskSets {
  std::vector<char> in_rows;
  std::vector<char> in_cols;
};

MaskSets Membership(const CellMask& region, std::size_t n0, std::size_t n1) {
  MaskSets sets{std::vector<char>(n0, 0), std::vector<char>(n1, 0)};
  for (Index r : region.rows) {
    if (r >= n0) throw ConfigError("mask row index out of range");
    sets.in_rows[r] = 1;
  }
  for (Index c : region.cols) {
    if (c >= n1) throw ConfigError("mask column index out of range");
    sets.in_cols[c] = 1;
  }
  return sets;
}

// (sum over members, sum over non-members)
std::pair<double, double> SplitSum(const Vector& w,
                                   const std::vector<char>& member) {
  double in = 0.0, out = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) (member[i] ? in : out) += w[i];
  return {in, out};
}

void CheckWeights(std::span<const Vector> weights, const CellMask* region) {
  if (region && weights.size() < 2) {
    throw ConfigError("masked sums need at least two modes");
  }
}

Vector Column(const Matrix& m, Eigen::Index k) { return m.col(k); }

}  // namespace

FactorSet::FactorSet(std::vector<Matrix> factors)
    : factors_(std::move(factors)) {
  Validate();
}

void FactorSet::Validate() const {
  if (factors_.empty()) throw ConfigError("a factor set needs one mode");
  const Eigen::Index k = factors_[0].cols();
  if (k <= 0) throw ConfigError("a factor set needs at least one component");
  for (std::size_t m = 0; m < factors_.size(); ++m) {
    const Matrix& f = factors_[m];
    if (f.cols() != k) {
      throw ConfigError("mode " + std::to_string(m) + " has " +
                        std::to_string(f.cols()) + " columns, expected " +
                        std::to_string(k));
    }
    if (f.rows() == 0) throw ConfigError("empty factor matrix");
    if (!f.allFinite() || (f.array() < 0.0).any()) {
      throw ConfigError("mode " + std::to_string(m) +
                        " factors must be finite and non-negative");
    }
  }
}

Shape FactorSet::shape() const {
  Shape s;
  for (const Matrix& f : factors_) s.push_back(static_cast<std::size_t>(f.rows()));
  return s;
}

double Reconstruct(const FactorSet& f, std::span<const Index> coord) {
  if (coord.size() != f.order()) {
    throw ConfigError("coordinate has the wrong number of modes");
  }
  for (std::size_t m = 0; m < coord.size(); ++m) {
    if (coord[m] >= f.factor(m).rows()) {
      throw ConfigError("coordinate out of range in mode " + std::to_string(m));
    }
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(f.rank()); ++k) {
    double prod = 1.0;
    for (std::size_t m = 0; m < coord.size(); ++m) {
      prod *= f.factor(m)(coord[m], k);
    }
    total += prod;
  }
  return total;
}

Vector RegionProductSums(std::span<const Vector> weights, std::size_t mode,
                         const CellMask* region) {
  CheckWeights(weights, region);
  const std::size_t order = weights.size();
  if (mode >= order) throw ConfigError("mode out of range");
  const auto rows = weights[mode].size();
  if (!region) {
    double value = 1.0;
    for (std::size_t m = 0; m < order; ++m) {
      if (m != mode) value *= weights[m].sum();
    }
    return Vector::Constant(rows, value);
  }
  const MaskSets sets = Membership(*region, weights[0].size(),
                                   weights[1].size());
  double others = 1.0;
  for (std::size_t m = 2; m < order; ++m) {
    if (m != mode) others *= weights[m].sum();
  }
  const auto [w0_in, w0_out] = SplitSum(weights[0], sets.in_rows);
  const auto [w1_in, w1_out] = SplitSum(weights[1], sets.in_cols);
  if (mode >= 2) {
    const double pair = region->complement
                            ? w0_out * (w1_in + w1_out) + w0_in * w1_out
                            : w0_in * w1_in;
    return Vector::Constant(rows, pair * others);
  }
  // mode 0 pairs each row with the column sets, mode 1 the reverse
  const auto& member = mode == 0 ? sets.in_rows : sets.in_cols;
  const double partner_in = mode == 0 ? w1_in : w0_in;
  const double partner_out = mode == 0 ? w1_out : w0_out;
  Vector out(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double partner;
    if (region->complement) {
      partner = member[r] ? partner_out : partner_in + partner_out;
    } else {
      partner = member[r] ? partner_in : 0.0;
    }
    out[r] = partner * others;
  }
  return out;
}

double RegionProductTotal(std::span<const Vector> weights,
                          const CellMask* region) {
  CheckWeights(weights, region);
  if (weights.empty()) return 0.0;
  return weights[0].dot(RegionProductSums(weights, 0, region));
}

double TotalReconstruction(const FactorSet& f, const CellMask* region) {
  std::vector<Vector> w(f.order());
  double total = 0.0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(f.rank()); ++k) {
    for (std::size_t m = 0; m < f.order(); ++m) w[m] = Column(f.factor(m), k);
    total += RegionProductTotal(w, region);
  }
  return total;
}

namespace {

void CheckShapes(const FactorSet& f, const SparseCountTensor& t) {
  if (f.shape() != t.shape()) {
    throw ConfigError("factor set and tensor shapes differ");
  }
}

bool InRegion(const SparseCountTensor& t, std::size_t e,
              const CellMask* region) {
  return !region || region->Selects(t.index(e, 0), t.index(e, 1));
}

}  // namespace

double PoissonLogLikelihood(const FactorSet& f, const SparseCountTensor& t,
                            const CellMask* region) {
  CheckShapes(f, t);
  double sum = 0.0;
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    if (!InRegion(t, e, region)) continue;
    const double y = static_cast<double>(t.count(e));
    const double yhat = Reconstruct(f, t.coord(e));
    if (yhat <= 0.0) return -std::numeric_limits<double>::infinity();
    sum += y * std::log(yhat) - std::lgamma(y + 1.0);
  }
  return sum - TotalReconstruction(f, region);
}

double GeneralizedKl(const SparseCountTensor& t, const FactorSet& f,
                     const CellMask* region) {
  CheckShapes(f, t);
  double sum = 0.0;
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    if (!InRegion(t, e, region)) continue;
    const double y = static_cast<double>(t.count(e));
    const double yhat = Reconstruct(f, t.coord(e));
    if (yhat <= 0.0) return std::numeric_limits<double>::infinity();
    sum += y * std::log(y / yhat) - y;
  }
  return sum + TotalReconstruction(f, region);
}

double SquaredError(const SparseCountTensor& t, const FactorSet& f,
                    const CellMask* region) {
  CheckShapes(f, t);
  double sum = 0.0;
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    if (!InRegion(t, e, region)) continue;
    const double y = static_cast<double>(t.count(e));
    sum += y * (y - 2.0 * Reconstruct(f, t.coord(e)));
  }
  // sum of yhat^2 = sum_{k,k'} sum_cells prod_m f_m[c,k] f_m[c,k']
  const auto rank = static_cast<Eigen::Index>(f.rank());
  std::vector<Vector> w(f.order());
  for (Eigen::Index k = 0; k < rank; ++k) {
    for (Eigen::Index l = k; l < rank; ++l) {
      for (std::size_t m = 0; m < f.order(); ++m) {
        w[m] = f.factor(m).col(k).cwiseProduct(f.factor(m).col(l));
      }
      sum += (k == l ? 1.0 : 2.0) * RegionProductTotal(w, region);
    }
  }
  return sum;
}

void WriteFactorSet(const std::string& dir, const std::string& stem,
                    const FactorSet& f, const std::string& labels_file) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  KeyValueDoc doc;
  doc.Set("kind", "factors");
  doc.Set("order", std::to_string(f.order()));
  doc.Set("rank", std::to_string(f.rank()));
  doc.Set("shape", JoinSizes(f.shape()));
  for (std::size_t m = 0; m < f.order(); ++m) {
    const std::string name = stem + "_mode" + std::to_string(m) + ".tsv";
    WriteMatrixFile((fs::path(dir) / name).string(), f.factor(m));
    doc.Set("mode" + std::to_string(m), name);
  }
  if (!labels_file.empty()) doc.Set("labels", labels_file);
  doc.WriteFile((fs::path(dir) / (stem + ".manifest")).string());
}

LoadedFactors ReadFactorSet(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const KeyValueDoc doc = KeyValueDoc::ParseFile(manifest_path);
  if (doc.Require("kind") != "factors") {
    throw DataError(manifest_path + " is not a factor manifest");
  }
  const fs::path base = fs::path(manifest_path).parent_path();
  const auto order = SplitSizes(doc.Require("order"));
  const auto rank = SplitSizes(doc.Require("rank"));
  const auto shape = SplitSizes(doc.Require("shape"));
  if (order.size() != 1 || rank.size() != 1 || shape.size() != order[0]) {
    throw DataError(manifest_path + ": inconsistent order/rank/shape");
  }
  std::vector<Matrix> mats;
  for (std::size_t m = 0; m < order[0]; ++m) {
    Matrix mat = ReadMatrixFile(
        (base / doc.Require("mode" + std::to_string(m))).string());
    if (static_cast<std::size_t>(mat.rows()) != shape[m] ||
        static_cast<std::size_t>(mat.cols()) != rank[0]) {
      throw DataError(manifest_path + ": mode " + std::to_string(m) +
                      " matrix does not match the manifest shape");
    }
    mats.push_back(std::move(mat));
  }
  LoadedFactors out{FactorSet(std::move(mats)), ""};
  if (auto labels = doc.Get("labels")) {
    out.labels_file = (base / *labels).string();
  }
  return out;
}

}  // namespace ptf
