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

#include "ptf/bptf.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "ptf/error.hpp"
#include "ptf/matrix_io.hpp"
#include "ptf/special.hpp"

namespace ptf {

Hyperparameters Hyperparameters::Default(std::size_t order, double alpha) {
  return {alpha, std::vector<double>(order, 1.0)};
}

void Hyperparameters::Validate(std::size_t order) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be positive and finite");
  }
  if (beta.size() != order) {
    throw ConfigError("expected " + std::to_string(order) +
                      " beta values, got " + std::to_string(beta.size()));
  }
  for (double b : beta) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw ConfigError("beta values must be positive and finite");
    }
  }
}

void FitConfig::Validate(std::size_t order) const {
  if (rank == 0) throw ConfigError("rank must be positive");
  if (max_iterations == 0) throw ConfigError("max_iterations must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(init_jitter >= 0.0)) throw ConfigError("init_jitter must be >= 0");
  for (std::size_t m : fixed_modes) {
    if (m >= order) {
      throw ConfigError("fixed mode " + std::to_string(m) + " out of range");
    }
  }
}

bool FitConfig::IsFixed(std::size_t mode) const {
  return std::find(fixed_modes.begin(), fixed_modes.end(), mode) !=
         fixed_modes.end();
}

VariationalState::VariationalState(std::vector<Matrix> shape,
                                   std::vector<Matrix> rate)
    : shape_(std::move(shape)), rate_(std::move(rate)) {
  if (shape_.empty() || shape_.size() != rate_.size()) {
    throw ConfigError("shape and rate need one matrix per mode");
  }
  arith_.resize(shape_.size());
  geom_.resize(shape_.size());
  for (std::size_t m = 0; m < shape_.size(); ++m) {
    if (shape_[m].rows() != rate_[m].rows() ||
        shape_[m].cols() != rate_[m].cols() ||
        shape_[m].cols() != shape_[0].cols() || shape_[m].cols() == 0) {
      throw ConfigError("shape/rate matrices disagree in mode " +
                        std::to_string(m));
    }
    Refresh(m);
  }
}

Shape VariationalState::dims() const {
  Shape s;
  for (const Matrix& g : shape_) s.push_back(static_cast<std::size_t>(g.rows()));
  return s;
}

void VariationalState::SetShape(std::size_t m, Matrix shape) {
  if (shape.rows() != shape_.at(m).rows() ||
      shape.cols() != shape_.at(m).cols()) {
    throw ConfigError("shape matrix has the wrong dimensions");
  }
  shape_[m] = std::move(shape);
  Refresh(m);
}

void VariationalState::SetRate(std::size_t m, Matrix rate) {
  if (rate.rows() != rate_.at(m).rows() || rate.cols() != rate_.at(m).cols()) {
    throw ConfigError("rate matrix has the wrong dimensions");
  }
  rate_[m] = std::move(rate);
  Refresh(m);
}

void VariationalState::SetMode(std::size_t m, Matrix shape, Matrix rate) {
  if (shape.rows() != shape_.at(m).rows() ||
      shape.cols() != shape_.at(m).cols() || rate.rows() != shape.rows() ||
      rate.cols() != shape.cols()) {
    throw ConfigError("mode matrices have the wrong dimensions");
  }
  shape_[m] = std::move(shape);
  rate_[m] = std::move(rate);
  Refresh(m);
}

void VariationalState::Refresh(std::size_t m) {
  const Matrix& g = shape_[m];
  const Matrix& d = rate_[m];
  if (!g.allFinite() || !d.allFinite() || (g.array() <= 0.0).any() ||
      (d.array() <= 0.0).any()) {
    throw NumericalError("variational parameters of mode " +
                         std::to_string(m) +
                         " must be positive and finite");
  }
  arith_[m] = g.cwiseQuotient(d);
  geom_[m] = g.unaryExpr([](double x) { return exp_digamma(x); })
                 .cwiseQuotient(d);
}

bool VariationalState::operator==(const VariationalState& other) const {
  if (order() != other.order()) return false;
  for (std::size_t m = 0; m < order(); ++m) {
    if (shape_[m] != other.shape_[m] || rate_[m] != other.rate_[m]) {
      return false;
    }
  }
  return true;
}

VariationalState InitState(const Shape& dims, const FitConfig& config,
                           const Hyperparameters& hyper) {
  config.Validate(dims.size());
  hyper.Validate(dims.size());
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto k = static_cast<Eigen::Index>(config.rank);
  const double width = config.init_jitter * hyper.alpha;
  std::vector<Matrix> shape, rate;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    const auto rows = static_cast<Eigen::Index>(dims[m]);
    Matrix g(rows, k);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) {
        g(r, c) = hyper.alpha + width * unit(rng);
      }
    }
    shape.push_back(std::move(g));
    rate.push_back(Matrix::Constant(rows, k, hyper.alpha * hyper.beta[m]));
  }
  return VariationalState(std::move(shape), std::move(rate));
}

namespace {

std::string FormatCoord(std::span<const Index> c) {
  std::string s = "(";
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (m) s += ", ";
    s += std::to_string(c[m]);
  }
  return s + ")";
}

void CheckTensorMatches(const SparseCountTensor& t, const Shape& dims) {
  if (t.shape() != dims) {
    throw ConfigError("tensor shape does not match the variational state");
  }
}

}  // namespace

Matrix ShapeUpdate(const SparseCountTensor& t,
                   std::span<const Matrix> geometric, std::size_t mode,
                   double alpha) {
  const std::size_t order = geometric.size();
  if (mode >= order || t.order() != order) {
    throw ConfigError("mode/order mismatch in shape update");
  }
  const auto k = geometric[0].cols();
  Matrix out = Matrix::Zero(geometric[mode].rows(), k);
  std::vector<double> weights(static_cast<std::size_t>(k));
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto c = t.coord(e);
    std::fill(weights.begin(), weights.end(), 1.0);
    for (std::size_t m = 0; m < order; ++m) {
      const double* row = geometric[m].data() + c[m] * k;
      for (Eigen::Index j = 0; j < k; ++j) weights[j] *= row[j];
    }
    double norm = 0.0;
    for (double w : weights) norm += w;
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw NumericalError("allocation denominator is " +
                           std::to_string(norm) + " at coordinate " +
                           FormatCoord(c));
    }
    const double scale = static_cast<double>(t.count(e)) / norm;
    double* dst = out.data() + c[mode] * k;
    for (Eigen::Index j = 0; j < k; ++j) dst[j] += scale * weights[j];
  }
  out.array() += alpha;
  return out;
}

Matrix RateUpdate(std::span<const Matrix> arithmetic, std::size_t mode,
                  double prior_rate, const CellMask* observed) {
  const std::size_t order = arithmetic.size();
  if (mode >= order) throw ConfigError("mode out of range in rate update");
  const auto k = arithmetic[0].cols();
  Matrix out(arithmetic[mode].rows(), k);
  std::vector<Vector> columns(order);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (std::size_t m = 0; m < order; ++m) columns[m] = arithmetic[m].col(j);
    out.col(j) = RegionProductSums(columns, mode, observed);
  }
  if (!out.allFinite()) {
    throw NumericalError("rate update overflowed in mode " +
                         std::to_string(mode));
  }
  out.array() += prior_rate;
  return out;
}

void UpdateGamma(VariationalState& state, const SparseCountTensor& t,
                 std::size_t mode, const Hyperparameters& hyper) {
  CheckTensorMatches(t, state.dims());
  state.SetShape(mode, ShapeUpdate(t, state.geometric(), mode, hyper.alpha));
}

void UpdateDelta(VariationalState& state, std::size_t mode,
                 const Hyperparameters& hyper, const CellMask* observed) {
  state.SetRate(mode, RateUpdate(state.arithmetic(), mode,
                                 hyper.alpha * hyper.beta.at(mode), observed));
}

double UpdateBeta(const VariationalState& state, std::size_t mode,
                  BetaRule rule) {
  const Matrix& e = state.arithmetic(mode);
  const double sum = e.sum();
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw NumericalError("expectation sum of mode " + std::to_string(mode) +
                         " is " + std::to_string(sum));
  }
  switch (rule) {
    case BetaRule::kInverseSum:
      return 1.0 / sum;
    case BetaRule::kInverseMean:
      return static_cast<double>(e.size()) / sum;
  }
  return 1.0 / sum;
}

double ComputeElbo(const VariationalState& state, const SparseCountTensor& t,
                   const Hyperparameters& hyper, const CellMask* observed) {
  CheckTensorMatches(t, state.dims());
  hyper.Validate(state.order());
  const std::size_t order = state.order();
  const auto k = static_cast<Eigen::Index>(state.rank());

  double data_term = 0.0;
  std::vector<double> weights(static_cast<std::size_t>(k));
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto c = t.coord(e);
    if (observed && !observed->Selects(c[0], c[1])) continue;
    std::fill(weights.begin(), weights.end(), 1.0);
    for (std::size_t m = 0; m < order; ++m) {
      const double* row = state.geometric(m).data() + c[m] * k;
      for (Eigen::Index j = 0; j < k; ++j) weights[j] *= row[j];
    }
    double norm = 0.0;
    for (double w : weights) norm += w;
    const double y = static_cast<double>(t.count(e));
    data_term += y * std::log(norm) - std::lgamma(y + 1.0);
  }
  if (!std::isfinite(data_term)) {
    throw NumericalError("ELBO count term is not finite (" +
                         std::to_string(data_term) + ")");
  }

  double mass = 0.0;
  std::vector<Vector> columns(order);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (std::size_t m = 0; m < order; ++m) {
      columns[m] = state.arithmetic(m).col(j);
    }
    mass += RegionProductTotal(columns, observed);
  }
  if (!std::isfinite(mass)) {
    throw NumericalError("ELBO reconstruction mass is not finite");
  }

  const double a = hyper.alpha;
  const double lgamma_a = std::lgamma(a);
  double prior_term = 0.0;
  double entropy_term = 0.0;
  for (std::size_t m = 0; m < order; ++m) {
    const double b = a * hyper.beta[m];
    const double log_b = std::log(b);
    const Matrix& g = state.shape(m);
    const Matrix& d = state.rate(m);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double shape = g.data()[i];
      const double rate = d.data()[i];
      const double psi = digamma(shape);
      const double log_rate = std::log(rate);
      const double e_log = psi - log_rate;
      prior_term += a * log_b - lgamma_a + (a - 1.0) * e_log -
                    b * shape / rate;
      entropy_term += shape - log_rate + std::lgamma(shape) +
                      (1.0 - shape) * psi;
    }
  }
  if (!std::isfinite(prior_term)) {
    throw NumericalError("ELBO prior term is not finite");
  }
  if (!std::isfinite(entropy_term)) {
    throw NumericalError("ELBO entropy term is not finite");
  }
  return data_term - mass + prior_term + entropy_term;
}

BptfFit Fit(const SparseCountTensor& t, const FitConfig& config,
            const Hyperparameters& hyper) {
  return Fit(t, config, hyper, InitState(t.shape(), config, hyper), nullptr);
}

BptfFit Fit(const SparseCountTensor& t, const FitConfig& config,
            const Hyperparameters& hyper, VariationalState init,
            const CellMask* observed) {
  CheckTensorMatches(t, init.dims());
  config.Validate(t.order());
  hyper.Validate(t.order());
  if (init.rank() != config.rank) {
    throw ConfigError("initial state rank differs from the configured rank");
  }
  CellMask mask;
  SparseCountTensor restricted;
  if (observed) {
    mask = *observed;
    mask.Normalize(t.shape()[0], t.shape()[1]);
    observed = &mask;
    // Shape updates read stored entries only; drop the unobserved ones.
    restricted = RestrictTo(t, mask);
  }
  const SparseCountTensor& data = observed ? restricted : t;

  BptfFit fit{std::move(init), hyper, {}};
  FitTrace& trace = fit.trace;
  trace.initial_elbo = ComputeElbo(fit.state, data, fit.hyper, observed);
  trace.initial_beta = fit.hyper.beta;
  double previous = trace.initial_elbo;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    for (std::size_t m = 0; m < t.order(); ++m) {
      if (config.IsFixed(m)) continue;
      UpdateGamma(fit.state, data, m, fit.hyper);
      UpdateDelta(fit.state, m, fit.hyper, observed);
    }
    if (config.learn_beta) {
      for (std::size_t m = 0; m < t.order(); ++m) {
        if (config.IsFixed(m)) continue;
        fit.hyper.beta[m] = UpdateBeta(fit.state, m, config.beta_rule);
      }
    }
    const double elbo = ComputeElbo(fit.state, data, fit.hyper, observed);
    trace.elbo.push_back(elbo);
    trace.beta.push_back(fit.hyper.beta);
    trace.iterations = it + 1;
    if (std::abs(elbo - previous) <= config.tolerance * std::abs(elbo)) {
      trace.converged = true;
      break;
    }
    previous = elbo;
  }
  return fit;
}

FactorSet PointEstimateOf(const VariationalState& state, PointEstimate kind) {
  std::vector<Matrix> mats;
  for (std::size_t m = 0; m < state.order(); ++m) {
    mats.push_back(kind == PointEstimate::kArithmetic ? state.arithmetic(m)
                                                      : state.geometric(m));
  }
  return FactorSet(std::move(mats));
}

BptfFit InferHeldoutTimeFactors(const VariationalState& trained,
                                const Hyperparameters& hyper,
                                const SparseCountTensor& test,
                                const CellMask& observed,
                                const FitConfig& config) {
  const std::size_t order = trained.order();
  if (order < 3 || test.order() != order) {
    throw ConfigError("held-out inference needs matching tensors of order >= 3");
  }
  const std::size_t time = order - 1;
  for (std::size_t m = 0; m < time; ++m) {
    if (static_cast<std::size_t>(trained.shape(m).rows()) != test.shape()[m]) {
      throw ConfigError("test tensor mode " + std::to_string(m) +
                        " differs from the trained state");
    }
  }
  CellMask mask = observed;
  mask.Normalize(test.shape()[0], test.shape()[1]);
  if (RegionSize(test.shape(), mask) == 0) {
    throw ConfigError("the observed region of the test slices is empty");
  }

  FitConfig cfg = config;
  cfg.rank = trained.rank();
  cfg.learn_beta = false;
  cfg.fixed_modes.clear();
  for (std::size_t m = 0; m < time; ++m) cfg.fixed_modes.push_back(m);

  // Fresh time-mode parameters next to the trained ones.
  Shape time_dims = {test.shape()[time]};
  Hyperparameters time_hyper{hyper.alpha, {hyper.beta.at(time)}};
  FitConfig time_cfg = cfg;
  time_cfg.fixed_modes.clear();
  const VariationalState fresh = InitState(time_dims, time_cfg, time_hyper);

  std::vector<Matrix> shape, rate;
  for (std::size_t m = 0; m < time; ++m) {
    shape.push_back(trained.shape(m));
    rate.push_back(trained.rate(m));
  }
  shape.push_back(fresh.shape(0));
  rate.push_back(fresh.rate(0));
  return Fit(test, cfg, hyper,
             VariationalState(std::move(shape), std::move(rate)), &mask);
}

void WriteState(const std::string& dir, const std::string& stem,
                const VariationalState& state, const Hyperparameters& hyper,
                const std::string& labels_file) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  KeyValueDoc doc;
  doc.Set("kind", "bptf_state");
  doc.Set("order", std::to_string(state.order()));
  doc.Set("rank", std::to_string(state.rank()));
  doc.Set("shape", JoinSizes(state.dims()));
  doc.Set("alpha", FormatDouble(hyper.alpha));
  doc.Set("beta", JoinDoubles(hyper.beta));
  for (std::size_t m = 0; m < state.order(); ++m) {
    const std::string g = stem + "_shape" + std::to_string(m) + ".tsv";
    const std::string d = stem + "_rate" + std::to_string(m) + ".tsv";
    WriteMatrixFile((fs::path(dir) / g).string(), state.shape(m));
    WriteMatrixFile((fs::path(dir) / d).string(), state.rate(m));
    doc.Set("shape" + std::to_string(m), g);
    doc.Set("rate" + std::to_string(m), d);
  }
  if (!labels_file.empty()) doc.Set("labels", labels_file);
  doc.WriteFile((fs::path(dir) / (stem + ".manifest")).string());
}

LoadedState ReadState(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const KeyValueDoc doc = KeyValueDoc::ParseFile(manifest_path);
  if (doc.Require("kind") != "bptf_state") {
    throw DataError(manifest_path + " is not a BPTF state manifest");
  }
  const fs::path base = fs::path(manifest_path).parent_path();
  const auto order = SplitSizes(doc.Require("order"));
  const auto shape_sizes = SplitSizes(doc.Require("shape"));
  if (order.size() != 1 || shape_sizes.size() != order[0]) {
    throw DataError(manifest_path + ": inconsistent order/shape");
  }
  std::vector<Matrix> shape, rate;
  for (std::size_t m = 0; m < order[0]; ++m) {
    shape.push_back(ReadMatrixFile(
        (base / doc.Require("shape" + std::to_string(m))).string()));
    rate.push_back(ReadMatrixFile(
        (base / doc.Require("rate" + std::to_string(m))).string()));
    if (static_cast<std::size_t>(shape.back().rows()) != shape_sizes[m]) {
      throw DataError(manifest_path + ": mode " + std::to_string(m) +
                      " rows do not match the manifest shape");
    }
  }
  const auto alpha = SplitDoubles(doc.Require("alpha"));
  if (alpha.size() != 1) throw DataError(manifest_path + ": bad alpha");
  LoadedState out{VariationalState(std::move(shape), std::move(rate)),
                  Hyperparameters{alpha[0], SplitDoubles(doc.Require("beta"))},
                  ""};
  out.hyper.Validate(out.state.order());
  if (auto labels = doc.Get("labels")) {
    out.labels_file = (base / *labels).string();
  }
  return out;
}

void WriteTrace(std::ostream& out, const FitTrace& trace) {
  auto row = [&](std::size_t it, double elbo, const std::vector<double>& b) {
    out << it << '\t' << FormatDouble(elbo);
    for (double v : b) out << '\t' << FormatDouble(v);
    out << '\n';
  };
  out << "iteration\telbo";
  for (std::size_t m = 0; m < trace.initial_beta.size(); ++m) {
    out << "\tbeta" << m;
  }
  out << '\n';
  for (std::size_t i = 0; i < trace.elbo.size(); ++i) {
    row(i + 1, trace.elbo[i], trace.beta[i]);
  }
}

}  // namespace ptf
