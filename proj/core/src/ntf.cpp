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

#include "ptf/ntf.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ptf/error.hpp"
#include "ptf/matrix_io.hpp"

namespace ptf {
namespace {

std::string FormatCoord(std::span<const Index> c) {
  std::string s = "(";
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (m) s += ", ";
    s += std::to_string(c[m]);
  }
  return s + ")";
}

void CheckSweepArgs(const FactorSet& f, const SparseCountTensor& t,
                    std::size_t mode, double epsilon_floor) {
  if (f.shape() != t.shape()) {
    throw ConfigError("factor set and tensor shapes differ");
  }
  if (mode >= f.order()) throw ConfigError("mode out of range");
  if (!(epsilon_floor >= 0.0)) {
    throw ConfigError("epsilon_floor must be non-negative");
  }
}

// For every stored entry in the region: q[k] = prod_{m != mode} f_m[c, k]
// and the full reconstruction sum_k q[k] f_mode[c, k].
template <typename Visit>
void ForEachEntry(const FactorSet& f, const SparseCountTensor& t,
                  std::size_t mode, const CellMask* observed, Visit visit) {
  const auto k = static_cast<Eigen::Index>(f.rank());
  std::vector<double> q(static_cast<std::size_t>(k));
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto c = t.coord(e);
    if (observed && !observed->Selects(c[0], c[1])) continue;
    std::fill(q.begin(), q.end(), 1.0);
    for (std::size_t m = 0; m < f.order(); ++m) {
      if (m == mode) continue;
      const double* row = f.factor(m).data() + c[m] * k;
      for (Eigen::Index j = 0; j < k; ++j) q[j] *= row[j];
    }
    const double* own = f.factor(mode).data() + c[mode] * k;
    double yhat = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) yhat += q[j] * own[j];
    visit(c, static_cast<double>(t.count(e)), yhat, q);
  }
}

CellMask Normalized(const CellMask* observed, const Shape& shape) {
  CellMask mask = *observed;
  mask.Normalize(shape[0], shape[1]);
  return mask;
}

}  // namespace

std::string_view ToString(NtfCost cost) {
  return cost == NtfCost::kKl ? "kl" : "ls";
}

void NtfConfig::Validate(std::size_t order) const {
  if (rank == 0) throw ConfigError("rank must be positive");
  if (max_iterations == 0) throw ConfigError("max_iterations must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(epsilon_floor >= 0.0)) {
    throw ConfigError("epsilon_floor must be non-negative");
  }
  for (std::size_t m : fixed_modes) {
    if (m >= order) {
      throw ConfigError("fixed mode " + std::to_string(m) + " out of range");
    }
  }
}

bool NtfConfig::IsFixed(std::size_t mode) const {
  return std::find(fixed_modes.begin(), fixed_modes.end(), mode) !=
         fixed_modes.end();
}

void NtfKlSweep(FactorSet& f, const SparseCountTensor& t, std::size_t mode,
                double epsilon_floor, const CellMask* observed) {
  CheckSweepArgs(f, t, mode, epsilon_floor);
  const auto k = static_cast<Eigen::Index>(f.rank());
  Matrix numer = Matrix::Zero(f.factor(mode).rows(), k);
  ForEachEntry(f, t, mode, observed,
               [&](std::span<const Index> c, double y, double yhat,
                   const std::vector<double>& q) {
                 if (!(yhat > 0.0)) {
                   throw InadmissibleZeroError(
                       "zero reconstruction at observed count " +
                       FormatCoord(c));
                 }
                 const double ratio = y / yhat;
                 double* dst = numer.data() + c[mode] * k;
                 for (Eigen::Index j = 0; j < k; ++j) dst[j] += q[j] * ratio;
               });
  Matrix& own = f.mutable_factor(mode);
  std::vector<Vector> columns(f.order());
  for (Eigen::Index j = 0; j < k; ++j) {
    for (std::size_t m = 0; m < f.order(); ++m) {
      columns[m] = f.factor(m).col(j);
    }
    const Vector denom = RegionProductSums(columns, mode, observed);
    for (Eigen::Index r = 0; r < own.rows(); ++r) {
      // A zero denominator means every contributing product is zero, so
      // the numerator is zero as well.
      const double ratio = denom[r] > 0.0 ? numer(r, j) / denom[r] : 0.0;
      own(r, j) = std::max(own(r, j) * ratio, epsilon_floor);
    }
  }
}

void NtfLsSweep(FactorSet& f, const SparseCountTensor& t, std::size_t mode,
                double epsilon_floor, const CellMask* observed) {
  CheckSweepArgs(f, t, mode, epsilon_floor);
  const auto k = static_cast<Eigen::Index>(f.rank());
  const auto rows = f.factor(mode).rows();
  Matrix numer = Matrix::Zero(rows, k);
  ForEachEntry(f, t, mode, observed,
               [&](std::span<const Index> c, double y, double,
                   const std::vector<double>& q) {
                 double* dst = numer.data() + c[mode] * k;
                 for (Eigen::Index j = 0; j < k; ++j) dst[j] += q[j] * y;
               });
  // denom(r, j) = sum_l f_mode(r, l) * S_{jl}(r), where S_{jl}(r) sums
  // prod_{m != mode} f_m[., j] f_m[., l] over region cells in row r.
  Matrix denom = Matrix::Zero(rows, k);
  std::vector<Vector> columns(f.order());
  const Matrix& current = f.factor(mode);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index l = j; l < k; ++l) {
      for (std::size_t m = 0; m < f.order(); ++m) {
        columns[m] = f.factor(m).col(j).cwiseProduct(f.factor(m).col(l));
      }
      const Vector s = RegionProductSums(columns, mode, observed);
      denom.col(j) += current.col(l).cwiseProduct(s);
      if (l != j) denom.col(l) += current.col(j).cwiseProduct(s);
    }
  }
  Matrix& own = f.mutable_factor(mode);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index j = 0; j < k; ++j) {
      double ratio = 0.0;
      if (denom(r, j) > 0.0) {
        ratio = numer(r, j) / denom(r, j);
      } else if (numer(r, j) > 0.0) {
        throw NumericalError("degenerate least-squares update: zero "
                             "denominator at mode " +
                             std::to_string(mode) + " row " +
                             std::to_string(r) + " component " +
                             std::to_string(j));
      }
      own(r, j) = std::max(own(r, j) * ratio, epsilon_floor);
    }
  }
}

double NtfObjective(const SparseCountTensor& t, const FactorSet& f,
                    NtfCost cost, const CellMask* observed) {
  return cost == NtfCost::kKl ? GeneralizedKl(t, f, observed)
                              : SquaredError(t, f, observed);
}

FactorSet InitNtfFactors(const Shape& shape, std::size_t rank,
                         std::uint64_t seed, double target_mass) {
  if (rank == 0) throw ConfigError("rank must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Matrix> mats;
  for (std::size_t s : shape) {
    Matrix m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = unit(rng);
    mats.push_back(std::move(m));
  }
  FactorSet f(std::move(mats));
  const double mass = TotalReconstruction(f);
  if (mass > 0.0 && target_mass > 0.0) {
    const double scale =
        std::pow(target_mass / mass, 1.0 / static_cast<double>(shape.size()));
    for (std::size_t m = 0; m < f.order(); ++m) f.mutable_factor(m) *= scale;
  }
  return f;
}

NtfFit FitNtf(const SparseCountTensor& t, const NtfConfig& config) {
  config.Validate(t.order());
  return FitNtf(t, config,
                InitNtfFactors(t.shape(), config.rank, config.seed,
                               static_cast<double>(t.total())),
                nullptr);
}

NtfFit FitNtf(const SparseCountTensor& t, const NtfConfig& config,
              FactorSet init, const CellMask* observed) {
  config.Validate(t.order());
  if (init.shape() != t.shape()) {
    throw ConfigError("initial factors do not match the tensor shape");
  }
  CellMask mask;
  if (observed) {
    mask = Normalized(observed, t.shape());
    observed = &mask;
  }
  NtfFit fit{std::move(init), {}};
  NtfTrace& trace = fit.trace;
  trace.initial = NtfObjective(t, fit.factors, config.cost, observed);
  double previous = trace.initial;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    for (std::size_t m = 0; m < t.order(); ++m) {
      if (config.IsFixed(m)) continue;
      if (config.cost == NtfCost::kKl) {
        NtfKlSweep(fit.factors, t, m, config.epsilon_floor, observed);
      } else {
        NtfLsSweep(fit.factors, t, m, config.epsilon_floor, observed);
      }
    }
    const double objective = NtfObjective(t, fit.factors, config.cost, observed);
    if (!std::isfinite(objective)) {
      throw NumericalError("NTF objective became non-finite at sweep " +
                           std::to_string(it + 1));
    }
    trace.objective.push_back(objective);
    trace.iterations = it + 1;
    if (std::abs(objective - previous) <=
        config.tolerance * std::abs(objective)) {
      trace.converged = true;
      break;
    }
    previous = objective;
  }
  return fit;
}

NtfFit InferHeldoutTimeFactorsNtf(const FactorSet& trained,
                                  const SparseCountTensor& test,
                                  const CellMask& observed,
                                  const NtfConfig& config) {
  const std::size_t order = trained.order();
  if (order < 3 || test.order() != order) {
    throw ConfigError("held-out inference needs matching tensors of order >= 3");
  }
  const std::size_t time = order - 1;
  for (std::size_t m = 0; m < time; ++m) {
    if (static_cast<std::size_t>(trained.factor(m).rows()) != test.shape()[m]) {
      throw ConfigError("test tensor mode " + std::to_string(m) +
                        " differs from the trained factors");
    }
  }
  const CellMask mask = Normalized(&observed, test.shape());
  if (RegionSize(test.shape(), mask) == 0) {
    throw ConfigError("the observed region of the test slices is empty");
  }
  NtfConfig cfg = config;
  cfg.rank = trained.rank();
  cfg.fixed_modes.clear();
  for (std::size_t m = 0; m < time; ++m) cfg.fixed_modes.push_back(m);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix time_factors(static_cast<Eigen::Index>(test.shape()[time]),
                      static_cast<Eigen::Index>(cfg.rank));
  for (Eigen::Index i = 0; i < time_factors.size(); ++i) {
    time_factors.data()[i] = unit(rng);
  }
  std::vector<Matrix> mats(trained.factors().begin(),
                           trained.factors().end() - 1);
  mats.push_back(std::move(time_factors));
  FactorSet init(std::move(mats));

  double observed_total = 0.0;
  for (std::size_t e = 0; e < test.nnz(); ++e) {
    if (mask.Selects(test.index(e, 0), test.index(e, 1))) {
      observed_total += static_cast<double>(test.count(e));
    }
  }
  const double mass = TotalReconstruction(init, &mask);
  if (mass > 0.0 && observed_total > 0.0) {
    init.mutable_factor(time) *= observed_total / mass;
  }
  return FitNtf(test, cfg, std::move(init), &mask);
}

void WriteObjectiveTrace(std::ostream& out, const NtfTrace& trace) {
  out << "iteration\tobjective\n";
  for (std::size_t i = 0; i < trace.objective.size(); ++i) {
    out << i + 1 << '\t' << FormatDouble(trace.objective[i]) << '\n';
  }
}

}  // namespace ptf
