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

#include "ptf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include <json.hpp>

#include "ptf/error.hpp"
#include "ptf/matrix_io.hpp"

namespace ptf {
namespace {

void CheckSpans(std::span<const double> p, std::span<const double> t) {
  if (p.size() != t.size()) {
    throw ConfigError("predictions and truth differ in length");
  }
}

}  // namespace

std::string_view ToString(ModelKind model) {
  switch (model) {
    case ModelKind::kBptfGeo:
      return "bptf-geo";
    case ModelKind::kBptfAri:
      return "bptf-ari";
    case ModelKind::kNtfKl:
      return "ntf-kl";
    case ModelKind::kNtfLs:
      return "ntf-ls";
  }
  return "?";
}

std::optional<ModelKind> ParseModelKind(std::string_view text) {
  for (ModelKind m : {ModelKind::kBptfGeo, ModelKind::kBptfAri,
                      ModelKind::kNtfKl, ModelKind::kNtfLs}) {
    if (text == ToString(m)) return m;
  }
  return std::nullopt;
}

double Mae(std::span<const double> predictions, std::span<const double> truth) {
  CheckSpans(predictions, truth);
  if (truth.empty()) throw ConfigError("MAE over an empty region");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sum += std::abs(predictions[i] - truth[i]);
  }
  return sum / static_cast<double>(truth.size());
}

std::optional<double> MaeNz(std::span<const double> predictions,
                            std::span<const double> truth) {
  CheckSpans(predictions, truth);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] > 0.0) {
      sum += std::abs(predictions[i] - truth[i]);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> HamZ(std::span<const double> predictions,
                           std::span<const double> truth) {
  CheckSpans(predictions, truth);
  std::size_t zeros = 0, wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0.0) {
      ++zeros;
      if (predictions[i] > 0.5) ++wrong;
    }
  }
  if (zeros == 0) return std::nullopt;
  return static_cast<double>(wrong) / static_cast<double>(zeros);
}

RegionMetrics EvaluateRegion(const FactorSet& f, const SparseCountTensor& truth,
                             const CellMask& region_in) {
  if (f.shape() != truth.shape()) {
    throw ConfigError("factor set and tensor shapes differ");
  }
  const Shape& shape = truth.shape();
  const std::size_t order = shape.size();
  if (order < 2) throw ConfigError("region evaluation needs two modes");
  CellMask region = region_in;
  region.Normalize(shape[0], shape[1]);

  // Trailing (mode >= 2) coordinates flattened row-major.
  auto trailing_id = [&](std::span<const Index> c) {
    std::size_t id = 0;
    for (std::size_t m = 2; m < order; ++m) id = id * shape[m] + c[m];
    return id;
  };
  std::size_t slabs = 1;
  for (std::size_t m = 2; m < order; ++m) slabs *= shape[m];

  struct Cell {
    std::size_t slab;
    Index i, j;
    double y;
  };
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < truth.nnz(); ++e) {
    const auto c = truth.coord(e);
    if (!region.Selects(c[0], c[1])) continue;
    cells.push_back({trailing_id(c), c[0], c[1],
                     static_cast<double>(truth.count(e))});
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.slab < b.slab; });

  const auto n0 = static_cast<Eigen::Index>(shape[0]);
  const auto n1 = static_cast<Eigen::Index>(shape[1]);
  std::vector<char> in_rows(shape[0], 0), in_cols(shape[1], 0);
  for (Index r : region.rows) in_rows[r] = 1;
  for (Index c : region.cols) in_cols[c] = 1;

  Matrix dense_truth = Matrix::Zero(n0, n1);
  Matrix weighted(n0, static_cast<Eigen::Index>(f.rank()));
  Matrix slab(n0, n1);
  std::vector<Index> coord(order, 0);

  double cell_count = 0, nonzero = 0, abs_all = 0, abs_nz = 0, abs_zero = 0;
  double zeros = 0, zeros_above = 0;
  std::size_t next = 0;
  for (std::size_t s = 0; s < slabs; ++s) {
    // decode trailing coordinates of slab s
    std::size_t rest = s;
    for (std::size_t m = order; m-- > 2;) {
      coord[m] = static_cast<Index>(rest % shape[m]);
      rest /= shape[m];
    }
    Vector w = Vector::Ones(static_cast<Eigen::Index>(f.rank()));
    for (std::size_t m = 2; m < order; ++m) {
      w = w.cwiseProduct(f.factor(m).row(coord[m]).transpose());
    }
    weighted = f.factor(0) * w.asDiagonal();
    slab.noalias() = weighted * f.factor(1).transpose();

    const std::size_t begin = next;
    while (next < cells.size() && cells[next].slab == s) {
      dense_truth(cells[next].i, cells[next].j) = cells[next].y;
      ++next;
    }
    for (Eigen::Index i = 0; i < n0; ++i) {
      for (Eigen::Index j = 0; j < n1; ++j) {
        if ((in_rows[i] && in_cols[j]) == region.complement) continue;
        const double y = dense_truth(i, j);
        const double yhat = slab(i, j);
        const double err = std::abs(yhat - y);
        cell_count += 1;
        abs_all += err;
        if (y > 0.0) {
          nonzero += 1;
          abs_nz += err;
        } else {
          zeros += 1;
          abs_zero += std::abs(yhat);
          if (yhat > 0.5) zeros_above += 1;
        }
      }
    }
    for (std::size_t c = begin; c < next; ++c) {
      dense_truth(cells[c].i, cells[c].j) = 0.0;
    }
  }
  if (cell_count == 0) throw ConfigError("MAE over an empty region");

  RegionMetrics out;
  out.cells = cell_count;
  out.nonzero_cells = nonzero;
  out.abs_error_nonzero = abs_nz;
  out.abs_prediction_zero = abs_zero;
  out.metrics.mae = abs_all / cell_count;
  if (nonzero > 0) out.metrics.mae_nz = abs_nz / nonzero;
  if (zeros > 0) out.metrics.ham_z = zeros_above / zeros;
  return out;
}

void ExperimentSpec::Validate(const Shape& shape) const {
  if (shape.size() < 3) {
    throw ConfigError("experiments need a tensor with a time mode");
  }
  if (shape[0] != shape[1]) {
    throw ConfigError("experiments need square sender x receiver slices");
  }
  if (n_prime == 0 || n_prime > shape[0]) {
    throw ConfigError("N' must lie in [1, N]");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (models.empty()) throw ConfigError("at least one model is required");
  if (rank == 0) throw ConfigError("rank must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  TestStepCount(shape.back(), test_fraction);
  const CellMask heldout = HeldoutRegion();
  if (RegionSize(shape, heldout) == 0) {
    throw ConfigError("scenario " + ScenarioName() +
                      " leaves an empty held-out region");
  }
  if (RegionSize(shape, heldout.Flipped()) == 0) {
    throw ConfigError("scenario " + ScenarioName() +
                      " leaves an empty observed region");
  }
}

std::string ExperimentSpec::ScenarioName() const {
  return dataset + "-top-" + std::to_string(n_prime) +
         (predict_complement ? "^c" : "");
}

CellMask ExperimentSpec::HeldoutRegion() const {
  return CellMask::TopBlock(n_prime, predict_complement);
}

const ModelResult* EvalReport::Find(ModelKind model) const {
  for (const ModelResult& r : models) {
    if (r.model == model) return &r;
  }
  return nullptr;
}

namespace {

struct SplitOutcome {
  SplitStats stats;
  std::vector<std::optional<Metrics>> metrics;  // parallel to spec.models
  std::vector<std::string> errors;
};

SplitOutcome RunSplit(const ExperimentSpec& spec, const SparseCountTensor& t,
                      std::uint64_t seed) {
  SplitOutcome out;
  out.metrics.resize(spec.models.size());
  out.errors.resize(spec.models.size());

  const TimeSplit split = SplitTime(t, spec.test_fraction, seed);
  const CellMask heldout = spec.HeldoutRegion();
  const CellMask observed = heldout.Flipped();

  out.stats.seed = seed;
  out.stats.density = Density(split.test, heldout);
  const SparseCountTensor truth = RestrictTo(split.test, heldout);
  out.stats.heldout_cells = RegionSize(split.test.shape(), heldout);
  out.stats.heldout_nonzeros = truth.nnz();
  if (truth.nnz() >= 2) out.stats.vmr = VmrNonzero(truth);

  auto index_of = [&](ModelKind m) -> std::optional<std::size_t> {
    auto it = std::find(spec.models.begin(), spec.models.end(), m);
    if (it == spec.models.end()) return std::nullopt;
    return static_cast<std::size_t>(it - spec.models.begin());
  };
  auto record_error = [&](std::initializer_list<ModelKind> models,
                          const std::string& what) {
    for (ModelKind m : models) {
      if (auto i = index_of(m)) out.errors[*i] = what;
    }
  };

  const auto geo = index_of(ModelKind::kBptfGeo);
  const auto ari = index_of(ModelKind::kBptfAri);
  if (geo || ari) {
    try {
      FitConfig cfg = spec.bptf;
      cfg.rank = spec.rank;
      cfg.seed = spec.bptf.seed + seed;
      const BptfFit trained =
          Fit(split.train, cfg, Hyperparameters::Default(t.order(), spec.alpha));
      const BptfFit test = InferHeldoutTimeFactors(
          trained.state, trained.hyper, split.test, observed, cfg);
      if (geo) {
        out.metrics[*geo] =
            EvaluateRegion(PointEstimateOf(test.state, PointEstimate::kGeometric),
                           split.test, heldout)
                .metrics;
      }
      if (ari) {
        out.metrics[*ari] =
            EvaluateRegion(
                PointEstimateOf(test.state, PointEstimate::kArithmetic),
                split.test, heldout)
                .metrics;
      }
    } catch (const Error& e) {
      record_error({ModelKind::kBptfGeo, ModelKind::kBptfAri}, e.what());
    }
  }
  for (ModelKind kind : {ModelKind::kNtfKl, ModelKind::kNtfLs}) {
    const auto idx = index_of(kind);
    if (!idx) continue;
    try {
      NtfConfig cfg = spec.ntf;
      cfg.rank = spec.rank;
      cfg.seed = spec.ntf.seed + seed;
      cfg.cost = kind == ModelKind::kNtfKl ? NtfCost::kKl : NtfCost::kLs;
      const NtfFit trained = FitNtf(split.train, cfg);
      const NtfFit test = InferHeldoutTimeFactorsNtf(trained.factors,
                                                     split.test, observed, cfg);
      out.metrics[*idx] = EvaluateRegion(test.factors, split.test, heldout).metrics;
    } catch (const Error& e) {
      record_error({kind}, e.what());
    }
  }
  return out;
}

std::optional<double> MeanOf(const std::vector<std::optional<double>>& xs) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& x : xs) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

EvalReport RunExperiment(const ExperimentSpec& spec,
                         const SparseCountTensor& t) {
  spec.Validate(t.shape());
  const SparseCountTensor sorted = SortByActivity(t).tensor;

  std::vector<SplitOutcome> outcomes(spec.seeds.size());
  const std::size_t workers = std::max<std::size_t>(1, spec.threads);
  for (std::size_t start = 0; start < spec.seeds.size(); start += workers) {
    const std::size_t stop = std::min(spec.seeds.size(), start + workers);
    if (workers == 1) {
      outcomes[start] = RunSplit(spec, sorted, spec.seeds[start]);
      continue;
    }
    std::vector<std::future<SplitOutcome>> jobs;
    for (std::size_t s = start; s < stop; ++s) {
      jobs.push_back(std::async(std::launch::async, RunSplit, std::cref(spec),
                                std::cref(sorted), spec.seeds[s]));
    }
    for (std::size_t s = start; s < stop; ++s) {
      outcomes[s] = jobs[s - start].get();
    }
  }

  EvalReport report;
  report.scenario = spec.ScenarioName();
  std::vector<std::optional<double>> densities, vmrs;
  for (const SplitOutcome& o : outcomes) {
    report.splits.push_back(o.stats);
    densities.push_back(o.stats.density);
    vmrs.push_back(o.stats.vmr);
  }
  report.density = *MeanOf(densities);
  report.vmr = MeanOf(vmrs);

  for (std::size_t i = 0; i < spec.models.size(); ++i) {
    ModelResult result;
    result.model = spec.models[i];
    std::vector<std::optional<double>> mae, mae_nz, ham_z;
    for (const SplitOutcome& o : outcomes) {
      result.per_split.push_back(o.metrics[i]);
      if (!o.errors[i].empty()) result.errors.push_back(o.errors[i]);
      if (o.metrics[i]) {
        mae.push_back(o.metrics[i]->mae);
        mae_nz.push_back(o.metrics[i]->mae_nz);
        ham_z.push_back(o.metrics[i]->ham_z);
      }
    }
    if (auto m = MeanOf(mae)) {
      result.mean = Metrics{*m, MeanOf(mae_nz), MeanOf(ham_z)};
    }
    report.models.push_back(std::move(result));
  }
  return report;
}

namespace {

std::string Cell(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : "nan";
}

nlohmann::json JsonValue(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json MetricsJson(const std::optional<Metrics>& m) {
  if (!m) return nullptr;
  return {{"mae", m->mae},
          {"mae_nz", JsonValue(m->mae_nz)},
          {"ham_z", JsonValue(m->ham_z)}};
}

}  // namespace

void WriteReportTsv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "scenario\tmodel\tdensity\tvmr\tmae\tmae_nz\tham_z\tfailed_splits\n";
  for (const EvalReport& r : reports) {
    for (const ModelResult& m : r.models) {
      out << r.scenario << '\t' << ToString(m.model) << '\t'
          << FormatDouble(r.density) << '\t' << Cell(r.vmr) << '\t';
      if (m.mean) {
        out << FormatDouble(m.mean->mae) << '\t' << Cell(m.mean->mae_nz)
            << '\t' << Cell(m.mean->ham_z);
      } else {
        out << "nan\tnan\tnan";
      }
      out << '\t' << m.errors.size() << '\n';
    }
  }
}

void WriteReportTable(std::ostream& out, std::span<const EvalReport> reports) {
  std::vector<ModelKind> columns;
  for (ModelKind k : {ModelKind::kNtfLs, ModelKind::kNtfKl,
                      ModelKind::kBptfGeo, ModelKind::kBptfAri}) {
    for (const EvalReport& r : reports) {
      if (r.Find(k)) {
        columns.push_back(k);
        break;
      }
    }
  }
  out << "scenario\tdensity\tvmr";
  for (ModelKind k : columns) {
    const std::string name(ToString(k));
    out << '\t' << name << ":mae\t" << name << ":mae_nz\t" << name
        << ":ham_z";
  }
  out << '\n';
  for (const EvalReport& r : reports) {
    out << r.scenario << '\t' << FormatDouble(r.density) << '\t' << Cell(r.vmr);
    for (ModelKind k : columns) {
      const ModelResult* m = r.Find(k);
      if (m && m->mean) {
        out << '\t' << FormatDouble(m->mean->mae) << '\t'
            << Cell(m->mean->mae_nz) << '\t' << Cell(m->mean->ham_z);
      } else {
        out << "\tnan\tnan\tnan";
      }
    }
    out << '\n';
  }
}

void WriteReportJson(std::ostream& out, std::span<const EvalReport> reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (const EvalReport& r : reports) {
    nlohmann::json splits = nlohmann::json::array();
    for (const SplitStats& s : r.splits) {
      splits.push_back({{"seed", s.seed},
                        {"density", s.density},
                        {"vmr", JsonValue(s.vmr)},
                        {"heldout_cells", s.heldout_cells},
                        {"heldout_nonzeros", s.heldout_nonzeros}});
    }
    nlohmann::json models = nlohmann::json::array();
    for (const ModelResult& m : r.models) {
      nlohmann::json per_split = nlohmann::json::array();
      for (const auto& s : m.per_split) per_split.push_back(MetricsJson(s));
      models.push_back({{"model", std::string(ToString(m.model))},
                        {"mean", MetricsJson(m.mean)},
                        {"per_split", per_split},
                        {"errors", m.errors}});
    }
    doc.push_back({{"scenario", r.scenario},
                   {"density", r.density},
                   {"vmr", JsonValue(r.vmr)},
                   {"splits", splits},
                   {"models", models}});
  }
  out << doc.dump(2) << '\n';
}

}  // namespace ptf
