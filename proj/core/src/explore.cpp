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

#include "ptf/explore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ptf/error.hpp"

namespace ptf {
namespace {

std::string Sig4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Rounds to 4 significant digits for the structured report.
double Round4(double v) { return std::strtod(Sig4(v).c_str(), nullptr); }

std::vector<double> Column(const Matrix& m, std::size_t k) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = m(i, static_cast<Eigen::Index>(k));
  }
  return out;
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

std::optional<double> Gini(std::span<const double> v) {
  if (v.size() < 2) throw ConfigError("gini needs at least two entries");
  std::vector<double> sorted(v.begin(), v.end());
  for (double x : sorted) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ConfigError("gini needs finite non-negative entries");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double total = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    total += sorted[i];
    weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i];
  }
  if (total == 0.0) return std::nullopt;
  return weighted / (n * total);
}

std::vector<std::size_t> RankComponents(const FactorSet& f,
                                        std::size_t time_mode) {
  if (time_mode >= f.order()) throw ConfigError("time mode out of range");
  const Matrix& time = f.factor(time_mode);
  std::vector<std::optional<double>> g(f.rank());
  for (std::size_t k = 0; k < f.rank(); ++k) g[k] = Gini(Column(time, k));
  std::vector<std::size_t> order(f.rank());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (!g[b]) return g[a].has_value();
                     if (!g[a]) return false;
                     return *g[a] > *g[b];
                   });
  return order;
}

std::string ModeName(std::size_t mode, std::size_t order) {
  if (order == 4) {
    static const char* kNames[] = {"sender", "receiver", "action", "time"};
    return kNames[mode];
  }
  if (mode + 1 == order) return "time";
  return "mode" + std::to_string(mode);
}

ComponentSummary Summarize(const FactorSet& f, const ModeLabels& labels,
                           std::size_t k, std::size_t top_n,
                           std::size_t time_mode) {
  const Shape shape = f.shape();
  if (k >= f.rank()) throw ConfigError("component index out of range");
  if (time_mode >= f.order()) throw ConfigError("time mode out of range");
  if (labels.size() != f.order()) {
    throw ConfigError("labels do not cover every mode");
  }
  for (std::size_t m = 0; m < f.order(); ++m) {
    if (labels[m].size() != shape[m]) {
      throw ConfigError("labels for mode " + std::to_string(m) +
                        " do not match its size");
    }
  }

  ComponentSummary s;
  s.component = k;
  s.time = Column(f.factor(time_mode), k);
  s.time_labels = labels[time_mode];
  s.gini = Gini(s.time);
  for (std::size_t m = 0; m < f.order(); ++m) {
    if (m == time_mode) continue;
    const std::vector<double> col = Column(f.factor(m), k);
    std::vector<std::size_t> idx(col.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return col[a] > col[b];
    });
    TopList top;
    top.mode = m;
    top.name = ModeName(m, f.order());
    const std::size_t n = std::min(top_n, col.size());
    for (std::size_t r = 0; r < n; ++r) {
      top.entries.push_back({labels[m][idx[r]], col[idx[r]]});
    }
    s.top.push_back(std::move(top));
  }
  return s;
}

void WriteSummaryText(std::ostream& out, const ComponentSummary& s,
                      std::size_t rank_position) {
  out << "component " << s.component << " (rank " << rank_position + 1
      << ")\n";
  out << "gini " << (s.gini ? Sig4(*s.gini) : "undefined") << "\n";
  for (const TopList& top : s.top) {
    out << "\n" << top.name << "\n";
    for (std::size_t r = 0; r < top.entries.size(); ++r) {
      out << "  " << r + 1 << ". " << top.entries[r].label << "  "
          << Sig4(top.entries[r].value) << "\n";
    }
  }
  out << "\ntime\n";
  for (std::size_t t = 0; t < s.time.size(); ++t) {
    out << "  " << s.time_labels[t] << "  " << Sig4(s.time[t]) << "\n";
  }
}

void WriteSummaryJson(std::ostream& out, const ComponentSummary& s,
                      std::size_t rank_position) {
  nlohmann::json doc;
  doc["component"] = s.component;
  doc["rank"] = rank_position + 1;
  doc["gini"] = s.gini ? nlohmann::json(Round4(*s.gini)) : nullptr;
  nlohmann::json top = nlohmann::json::object();
  for (const TopList& t : s.top) {
    nlohmann::json entries = nlohmann::json::array();
    for (const LabeledValue& e : t.entries) {
      entries.push_back({{"label", e.label}, {"value", Round4(e.value)}});
    }
    top[t.name] = entries;
  }
  doc["top"] = top;
  nlohmann::json time = nlohmann::json::array();
  for (std::size_t t = 0; t < s.time.size(); ++t) {
    time.push_back({{"label", s.time_labels[t]}, {"value", Round4(s.time[t])}});
  }
  doc["time"] = time;
  out << doc.dump(2) << '\n';
}

void WritePanelTsv(std::ostream& out, const ComponentSummary& s,
                   std::size_t panel) {
  out << "rank\tlabel\tvalue\n";
  if (panel < s.top.size()) {
    const auto& entries = s.top[panel].entries;
    for (std::size_t r = 0; r < entries.size(); ++r) {
      out << r + 1 << '\t' << entries[r].label << '\t'
          << Sig4(entries[r].value) << '\n';
    }
    return;
  }
  if (panel != s.top.size()) throw ConfigError("panel out of range");
  for (std::size_t t = 0; t < s.time.size(); ++t) {
    out << t + 1 << '\t' << s.time_labels[t] << '\t' << Sig4(s.time[t]) << '\n';
  }
}

std::vector<std::size_t> WriteComponentReports(const std::string& dir,
                                               const FactorSet& f,
                                               const ModeLabels& labels,
                                               std::size_t top_n,
                                               std::size_t time_mode) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::vector<std::size_t> ranking = RankComponents(f, time_mode);

  std::ofstream index = OpenOut(fs::path(dir) / "index.tsv");
  index << "rank\tcomponent\tgini\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const std::size_t k = ranking[r];
    const ComponentSummary s = Summarize(f, labels, k, top_n, time_mode);
    index << r + 1 << '\t' << k << '\t'
          << (s.gini ? Sig4(*s.gini) : "nan") << '\n';

    const std::string stem = "component_" + std::to_string(k);
    std::ofstream text = OpenOut(fs::path(dir) / (stem + ".txt"));
    WriteSummaryText(text, s, r);
    std::ofstream json = OpenOut(fs::path(dir) / (stem + ".json"));
    WriteSummaryJson(json, s, r);
    for (std::size_t p = 0; p <= s.top.size(); ++p) {
      const std::string name = p < s.top.size() ? s.top[p].name : "time";
      std::ofstream panel = OpenOut(fs::path(dir) / (stem + "_" + name + ".tsv"));
      WritePanelTsv(panel, s, p);
    }
  }
  return ranking;
}

}  // namespace ptf
