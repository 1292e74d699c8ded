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

#include "ptf/tensor_store.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ptf/error.hpp"

namespace ptf {
namespace {

ModeLabels DefaultLabels(const Shape& shape) {
  ModeLabels labels(shape.size());
  for (std::size_t m = 0; m < shape.size(); ++m) {
    labels[m].reserve(shape[m]);
    for (std::size_t i = 0; i < shape[m]; ++i) {
      labels[m].push_back(std::to_string(i));
    }
  }
  return labels;
}

void CheckShape(const Shape& shape, std::size_t coord_count,
                std::size_t count_count) {
  if (shape.empty()) throw ConfigError("tensor must have at least one mode");
  for (std::size_t s : shape) {
    if (s == 0) throw ConfigError("tensor mode sizes must be positive");
  }
  if (coord_count != count_count * shape.size()) {
    throw ConfigError("coordinate buffer does not match entry count");
  }
}

std::string FormatCoord(std::span<const Index> c) {
  std::string s = "(";
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (m) s += ", ";
    s += std::to_string(c[m]);
  }
  return s + ")";
}

// Permutation of entry ids sorting coordinates lexicographically.
std::vector<std::size_t> SortedEntryOrder(std::size_t order,
                                          const std::vector<Index>& coords,
                                          std::size_t nnz) {
  std::vector<std::size_t> perm(nnz);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(
        coords.begin() + a * order, coords.begin() + (a + 1) * order,
        coords.begin() + b * order, coords.begin() + (b + 1) * order);
  });
  return perm;
}

bool SameCoord(const std::vector<Index>& coords, std::size_t order,
               std::size_t a, std::size_t b) {
  return std::equal(coords.begin() + a * order,
                    coords.begin() + (a + 1) * order,
                    coords.begin() + b * order);
}

}  // namespace

SparseCountTensor::SparseCountTensor(Shape shape, std::vector<Index> coords,
                                     std::vector<Count> counts,
                                     ModeLabels labels)
    : shape_(std::move(shape)) {
  CheckShape(shape_, coords.size(), counts.size());
  const std::size_t m_order = shape_.size();
  const std::size_t nnz = counts.size();
  for (std::size_t e = 0; e < nnz; ++e) {
    if (counts[e] == 0) {
      throw ConfigError("stored counts must be positive");
    }
    for (std::size_t m = 0; m < m_order; ++m) {
      if (coords[e * m_order + m] >= shape_[m]) {
        throw ConfigError(
            "coordinate " +
            FormatCoord({coords.data() + e * m_order, m_order}) +
            " is outside the tensor shape");
      }
    }
  }
  const auto perm = SortedEntryOrder(m_order, coords, nnz);
  coords_.resize(coords.size());
  counts_.resize(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    const std::size_t src = perm[e];
    if (e > 0 && SameCoord(coords, m_order, perm[e - 1], src)) {
      throw ConfigError("duplicate coordinate " +
                        FormatCoord({coords.data() + src * m_order, m_order}));
    }
    std::copy_n(coords.begin() + src * m_order, m_order,
                coords_.begin() + e * m_order);
    counts_[e] = counts[src];
  }
  if (labels.empty()) {
    labels_ = DefaultLabels(shape_);
  } else {
    if (labels.size() != m_order) {
      throw ConfigError("one label list per mode is required");
    }
    for (std::size_t m = 0; m < m_order; ++m) {
      if (labels[m].size() != shape_[m]) {
        throw ConfigError("mode " + std::to_string(m) + " has " +
                          std::to_string(labels[m].size()) +
                          " labels for size " + std::to_string(shape_[m]));
      }
    }
    labels_ = std::move(labels);
  }
}

SparseCountTensor SparseCountTensor::FromSummedEntries(
    Shape shape, std::vector<Index> coords, std::vector<Count> counts,
    ModeLabels labels) {
  CheckShape(shape, coords.size(), counts.size());
  const std::size_t m_order = shape.size();
  const auto perm = SortedEntryOrder(m_order, coords, counts.size());
  std::vector<Index> merged_coords;
  std::vector<Count> merged_counts;
  for (std::size_t e = 0; e < perm.size(); ++e) {
    const std::size_t src = perm[e];
    if (counts[src] == 0) continue;
    if (!merged_counts.empty() &&
        std::equal(coords.begin() + src * m_order,
                   coords.begin() + (src + 1) * m_order,
                   merged_coords.end() - m_order)) {
      merged_counts.back() += counts[src];
      continue;
    }
    merged_coords.insert(merged_coords.end(), coords.begin() + src * m_order,
                         coords.begin() + (src + 1) * m_order);
    merged_counts.push_back(counts[src]);
  }
  return SparseCountTensor(std::move(shape), std::move(merged_coords),
                           std::move(merged_counts), std::move(labels));
}

double SparseCountTensor::cell_count() const {
  double cells = 1.0;
  for (std::size_t s : shape_) cells *= static_cast<double>(s);
  return cells;
}

Count SparseCountTensor::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), Count{0});
}

CellMask CellMask::TopBlock(std::size_t n_prime, bool complement) {
  CellMask mask;
  mask.rows.resize(n_prime);
  std::iota(mask.rows.begin(), mask.rows.end(), Index{0});
  mask.cols = mask.rows;
  mask.complement = complement;
  return mask;
}

CellMask CellMask::All(std::size_t n0, std::size_t n1) {
  CellMask mask;
  mask.rows.resize(n0);
  mask.cols.resize(n1);
  std::iota(mask.rows.begin(), mask.rows.end(), Index{0});
  std::iota(mask.cols.begin(), mask.cols.end(), Index{0});
  return mask;
}

CellMask CellMask::Flipped() const {
  CellMask out = *this;
  out.complement = !complement;
  return out;
}

bool CellMask::Selects(Index i, Index j) const {
  const bool inside = std::binary_search(rows.begin(), rows.end(), i) &&
                      std::binary_search(cols.begin(), cols.end(), j);
  return inside != complement;
}

void CellMask::Normalize(std::size_t n0, std::size_t n1) {
  for (auto* set : {&rows, &cols}) {
    std::sort(set->begin(), set->end());
    set->erase(std::unique(set->begin(), set->end()), set->end());
  }
  if (!rows.empty() && rows.back() >= n0) {
    throw ConfigError("mask row index " + std::to_string(rows.back()) +
                      " out of range for size " + std::to_string(n0));
  }
  if (!cols.empty() && cols.back() >= n1) {
    throw ConfigError("mask column index " + std::to_string(cols.back()) +
                      " out of range for size " + std::to_string(n1));
  }
}

double RegionSize(const Shape& shape, const CellMask& mask) {
  if (shape.size() < 2) throw ConfigError("masks need at least two modes");
  const double block = static_cast<double>(mask.rows.size()) *
                       static_cast<double>(mask.cols.size());
  double pairs = mask.complement
                     ? static_cast<double>(shape[0]) * shape[1] - block
                     : block;
  for (std::size_t m = 2; m < shape.size(); ++m) pairs *= shape[m];
  return pairs;
}

double Density(const SparseCountTensor& t) {
  if (t.order() == 0) return 0.0;
  return static_cast<double>(t.nnz()) / t.cell_count();
}

double Density(const SparseCountTensor& t, const CellMask& region) {
  const double cells = RegionSize(t.shape(), region);
  if (cells == 0) throw UndefinedStatisticError("density of an empty region");
  std::size_t inside = 0;
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    if (region.Selects(t.index(e, 0), t.index(e, 1))) ++inside;
  }
  return static_cast<double>(inside) / cells;
}

double VmrNonzero(const SparseCountTensor& t) {
  if (t.nnz() < 2) {
    throw UndefinedStatisticError("VMR needs at least two stored entries");
  }
  double mean = 0.0;
  for (Count c : t.counts()) mean += static_cast<double>(c);
  mean /= static_cast<double>(t.nnz());
  double var = 0.0;
  for (Count c : t.counts()) {
    const double d = static_cast<double>(c) - mean;
    var += d * d;
  }
  var /= static_cast<double>(t.nnz());
  return var / mean;
}

ActivitySort SortByActivity(const SparseCountTensor& t) {
  if (t.order() < 2 || t.labels(0) != t.labels(1)) {
    throw ConfigError("modes 0 and 1 must share one actor label set");
  }
  const std::size_t n = t.shape()[0];
  std::vector<Count> activity(n, 0);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    activity[t.index(e, 0)] += t.count(e);
    activity[t.index(e, 1)] += t.count(e);
  }
  const auto& names = t.labels(0);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (activity[a] != activity[b]) return activity[a] > activity[b];
    return names[a] < names[b];
  });
  std::vector<Index> new_index(n);
  for (std::size_t pos = 0; pos < n; ++pos) new_index[order[pos]] = pos;

  std::vector<Index> coords(t.coords().begin(), t.coords().end());
  const std::size_t m_order = t.order();
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    coords[e * m_order] = new_index[coords[e * m_order]];
    coords[e * m_order + 1] = new_index[coords[e * m_order + 1]];
  }
  ModeLabels labels = t.labels();
  for (std::size_t pos = 0; pos < n; ++pos) {
    labels[0][pos] = names[order[pos]];
  }
  labels[1] = labels[0];
  std::vector<Count> counts(t.counts().begin(), t.counts().end());
  return {SparseCountTensor(t.shape(), std::move(coords), std::move(counts),
                            std::move(labels)),
          std::move(order)};
}

std::size_t TestStepCount(std::size_t steps, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie strictly between 0 and 1");
  }
  const auto rounded = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(steps)));
  return std::max<std::size_t>(1, rounded);
}

TimeSplit SplitTime(const SparseCountTensor& t, double test_fraction,
                    std::uint64_t seed) {
  if (t.order() == 0) throw ConfigError("tensor has no modes");
  return SplitTime(t, test_fraction, seed, t.order() - 1);
}

TimeSplit SplitTime(const SparseCountTensor& t, double test_fraction,
                    std::uint64_t seed, std::size_t time_mode) {
  if (time_mode >= t.order()) throw ConfigError("time mode out of range");
  const std::size_t steps = t.shape()[time_mode];
  const std::size_t n_test = TestStepCount(steps, test_fraction);
  if (n_test >= steps) {
    throw ConfigError("test fraction " + std::to_string(test_fraction) +
                      " leaves no training steps out of " +
                      std::to_string(steps));
  }
  std::vector<Index> perm(steps);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  TimeSplit split;
  split.test_steps.assign(perm.begin(), perm.begin() + n_test);
  split.train_steps.assign(perm.begin() + n_test, perm.end());
  std::sort(split.test_steps.begin(), split.test_steps.end());
  std::sort(split.train_steps.begin(), split.train_steps.end());

  // old step -> (is_test, new index)
  std::vector<std::pair<bool, Index>> where(steps);
  for (std::size_t i = 0; i < split.train_steps.size(); ++i) {
    where[split.train_steps[i]] = {false, static_cast<Index>(i)};
  }
  for (std::size_t i = 0; i < split.test_steps.size(); ++i) {
    where[split.test_steps[i]] = {true, static_cast<Index>(i)};
  }

  const std::size_t m_order = t.order();
  std::vector<Index> coords[2];
  std::vector<Count> counts[2];
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto [is_test, step] = where[t.index(e, time_mode)];
    auto c = t.coord(e);
    auto& dst = coords[is_test];
    dst.insert(dst.end(), c.begin(), c.end());
    dst[dst.size() - m_order + time_mode] = step;
    counts[is_test].push_back(t.count(e));
  }

  auto build = [&](int part, const std::vector<Index>& steps_kept) {
    Shape shape = t.shape();
    shape[time_mode] = steps_kept.size();
    ModeLabels labels = t.labels();
    labels[time_mode].clear();
    for (Index s : steps_kept) {
      labels[time_mode].push_back(t.labels(time_mode)[s]);
    }
    return SparseCountTensor(std::move(shape), std::move(coords[part]),
                             std::move(counts[part]), std::move(labels));
  };
  split.train = build(0, split.train_steps);
  split.test = build(1, split.test_steps);
  return split;
}

SparseCountTensor RestrictTo(const SparseCountTensor& t,
                             const CellMask& region) {
  std::vector<Index> coords;
  std::vector<Count> counts;
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    if (!region.Selects(t.index(e, 0), t.index(e, 1))) continue;
    auto c = t.coord(e);
    coords.insert(coords.end(), c.begin(), c.end());
    counts.push_back(t.count(e));
  }
  return SparseCountTensor(t.shape(), std::move(coords), std::move(counts),
                           t.labels());
}

MaskedSlice ApplyMask(const SparseCountTensor& slice, CellMask mask) {
  if (slice.order() < 2) throw ConfigError("masks need at least two modes");
  mask.Normalize(slice.shape()[0], slice.shape()[1]);
  MaskedSlice out;
  out.heldout_region = mask.Flipped();
  out.observed = RestrictTo(slice, mask);
  out.heldout = RestrictTo(slice, out.heldout_region);
  out.observed_cells = RegionSize(slice.shape(), mask);
  out.heldout_cells = RegionSize(slice.shape(), out.heldout_region);
  return out;
}

}  // namespace ptf
