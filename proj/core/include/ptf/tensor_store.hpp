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

#ifndef PTF_TENSOR_STORE_HPP_
#define PTF_TENSOR_STORE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ptf {

using Index = std::uint32_t;
using Count = std::uint64_t;
using Shape = std::vector<std::size_t>;
using ModeLabels = std::vector<std::vector<std::string>>;

// An M-way tensor of non-negative integer counts in coordinate format.
// Only positive counts are stored. Entries are kept sorted
// lexicographically by coordinate, so two tensors holding the same cells
// compare equal regardless of how they were assembled.
class SparseCountTensor {
 public:
  SparseCountTensor() = default;

  // Strict constructor: `coords` holds nnz * shape.size() indices, row-major
  // by entry. Rejects out-of-range indices, zero counts and duplicate
  // coordinates. Empty `labels` yields decimal index labels.
  SparseCountTensor(Shape shape, std::vector<Index> coords,
                    std::vector<Count> counts, ModeLabels labels = {});

  // Aggregating constructor: duplicate coordinates are summed and zero
  // counts are dropped.
  static SparseCountTensor FromSummedEntries(Shape shape,
                                             std::vector<Index> coords,
                                             std::vector<Count> counts,
                                             ModeLabels labels = {});

  std::size_t order() const { return shape_.size(); }
  const Shape& shape() const { return shape_; }
  std::size_t nnz() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }

  std::span<const Index> coord(std::size_t entry) const {
    return {coords_.data() + entry * order(), order()};
  }
  Index index(std::size_t entry, std::size_t mode) const {
    return coords_[entry * order() + mode];
  }
  Count count(std::size_t entry) const { return counts_[entry]; }

  std::span<const Index> coords() const { return coords_; }
  std::span<const Count> counts() const { return counts_; }

  const ModeLabels& labels() const { return labels_; }
  const std::vector<std::string>& labels(std::size_t mode) const {
    return labels_.at(mode);
  }

  // Product of the mode sizes, as a double since it can exceed 2^64 for
  // wide tensors.
  double cell_count() const;
  Count total() const;

  bool operator==(const SparseCountTensor&) const = default;

 private:
  Shape shape_;
  std::vector<Index> coords_;
  std::vector<Count> counts_;
  ModeLabels labels_;
};

// Selects cells by their mode-0/mode-1 coordinates. Without `complement`
// the selection is the block rows x cols; with it, every (i, j) pair outside
// that block. All remaining modes are unrestricted.
struct CellMask {
  std::vector<Index> rows;
  std::vector<Index> cols;
  bool complement = false;

  // Upper-left n_prime x n_prime block.
  static CellMask TopBlock(std::size_t n_prime, bool complement = false);
  // Every (i, j) pair of an n0 x n1 grid.
  static CellMask All(std::size_t n0, std::size_t n1);

  CellMask Flipped() const;
  bool Selects(Index i, Index j) const;
  // Sorts and de-duplicates the index sets, then checks them against the
  // mode sizes. Throws ConfigError on an out-of-range index.
  void Normalize(std::size_t n0, std::size_t n1);

  bool operator==(const CellMask&) const = default;
};

// Number of cells of `shape` selected by `mask`.
double RegionSize(const Shape& shape, const CellMask& mask);

double Density(const SparseCountTensor& t);
// Stored entries inside `region` divided by the region's size.
double Density(const SparseCountTensor& t, const CellMask& region);

// Population variance of stored counts over their mean. Throws
// UndefinedStatisticError with fewer than two entries.
double VmrNonzero(const SparseCountTensor& t);

struct ActivitySort {
  SparseCountTensor tensor;
  // order[new_index] = old_index
  std::vector<Index> order;
};

// Reorders the shared actor set of modes 0 and 1 by descending total count
// over both roles; ties go to the lexicographically smaller label.
ActivitySort SortByActivity(const SparseCountTensor& t);

struct TimeSplit {
  SparseCountTensor train;
  SparseCountTensor test;
  std::vector<Index> train_steps;  // original indices, ascending
  std::vector<Index> test_steps;   // original indices, ascending
};

// Number of held-out steps: round(fraction * steps), at least one.
std::size_t TestStepCount(std::size_t steps, double test_fraction);

// Partitions the steps of `time_mode` (default: last mode) uniformly at
// random. Both halves keep chronological order and the full size of the
// other modes.
TimeSplit SplitTime(const SparseCountTensor& t, double test_fraction,
                    std::uint64_t seed);
TimeSplit SplitTime(const SparseCountTensor& t, double test_fraction,
                    std::uint64_t seed, std::size_t time_mode);

struct MaskedSlice {
  SparseCountTensor observed;  // stored entries selected by the mask
  SparseCountTensor heldout;   // stored entries outside it
  CellMask heldout_region;     // every cell outside the mask, zeros included
  double observed_cells = 0;
  double heldout_cells = 0;
};

MaskedSlice ApplyMask(const SparseCountTensor& slice, CellMask mask);

// Entries of `t` whose mode-0/1 coordinates fall inside `region`.
SparseCountTensor RestrictTo(const SparseCountTensor& t,
                             const CellMask& region);

}  // namespace ptf

#endif  // PTF_TENSOR_STORE_HPP_
