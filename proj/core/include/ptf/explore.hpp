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

#ifndef PTF_EXPLORE_HPP_
#define PTF_EXPLORE_HPP_

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ptf/cp.hpp"
#include "ptf/tensor_store.hpp"

namespace ptf {

// Relative mean absolute difference, population convention:
//   sum_i sum_j |v_i - v_j| / (2 n^2 mean(v)).
// Sorted-cumulative-sum form, O(n log n). nullopt for an all-zero vector.
// Throws ConfigError for fewer than two entries or a negative entry.
std::optional<double> Gini(std::span<const double> v);

// Components by descending gini of their time columns. Ties keep index
// order; columns whose gini is undefined (all zero) come last.
std::vector<std::size_t> RankComponents(const FactorSet& f,
                                        std::size_t time_mode);

struct LabeledValue {
  std::string label;
  double value = 0;
};

struct TopList {
  std::size_t mode = 0;
  std::string name;  // "sender", "receiver", "action" or "mode<m>"
  std::vector<LabeledValue> entries;  // descending by value
};

struct ComponentSummary {
  std::size_t component = 0;
  std::optional<double> gini;
  std::vector<TopList> top;                // every mode except time
  std::vector<double> time;                // chronological
  std::vector<std::string> time_labels;
};

// Display name of `mode` in a tensor of the given order.
std::string ModeName(std::size_t mode, std::size_t order);

// `labels` must hold one label per index of every mode. Each top list holds
// min(top_n, mode size) entries.
ComponentSummary Summarize(const FactorSet& f, const ModeLabels& labels,
                           std::size_t k, std::size_t top_n,
                           std::size_t time_mode);

// Values at 4 significant digits.
void WriteSummaryText(std::ostream& out, const ComponentSummary& s,
                      std::size_t rank_position);
void WriteSummaryJson(std::ostream& out, const ComponentSummary& s,
                      std::size_t rank_position);
// Plot-ready "rank<TAB>label<TAB>value" table; `panel` indexes s.top, or
// equals s.top.size() for the time profile.
void WritePanelTsv(std::ostream& out, const ComponentSummary& s,
                   std::size_t panel);

// Writes index.tsv (rank, component, gini) plus, per component k,
// component_<k>.txt, component_<k>.json and component_<k>_<panel>.tsv.
// Returns the ranking.
std::vector<std::size_t> WriteComponentReports(const std::string& dir,
                                               const FactorSet& f,
                                               const ModeLabels& labels,
                                               std::size_t top_n,
                                               std::size_t time_mode);

}  // namespace ptf

#endif  // PTF_EXPLORE_HPP_
