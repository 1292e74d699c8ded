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

#ifndef PTF_BPTF_HPP_
#define PTF_BPTF_HPP_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ptf/cp.hpp"
#include "ptf/matrix.hpp"
#include "ptf/tensor_store.hpp"

namespace ptf {

// Gamma(alpha, alpha * beta[m]) priors on the mode-m factors, so the prior
// mean of every mode-m factor is 1 / beta[m].
struct Hyperparameters {
  double alpha = 0.1;
  std::vector<double> beta;

  static Hyperparameters Default(std::size_t order, double alpha = 0.1);
  void Validate(std::size_t order) const;
};

// How the empirical-Bayes step re-estimates beta[m] from the current
// arithmetic expectations of mode m.
enum class BetaRule {
  kInverseSum,   // 1 / sum_{r,k} E[theta]
  kInverseMean,  // rows * K / sum_{r,k} E[theta]; maximizes the bound in beta
};

struct FitConfig {
  std::size_t rank = 50;
  std::size_t max_iterations = 500;
  double tolerance = 1e-5;  // on |delta ELBO| / |ELBO|
  std::uint64_t seed = 0;
  bool learn_beta = true;
  BetaRule beta_rule = BetaRule::kInverseMean;
  std::vector<std::size_t> fixed_modes;
  // Initial shape jitter is Uniform(0, init_jitter * alpha).
  double init_jitter = 1.0;

  void Validate(std::size_t order) const;
  bool IsFixed(std::size_t mode) const;
};

struct FitTrace {
  double initial_elbo = 0.0;
  std::vector<double> initial_beta;
  std::vector<double> elbo;               // after each sweep
  std::vector<std::vector<double>> beta;  // after each sweep
  std::size_t iterations = 0;
  bool converged = false;
};

enum class PointEstimate { kArithmetic, kGeometric };

// Mean-field Gamma(shape, rate) factors with cached expectations
//   E[theta] = shape / rate,   G[theta] = exp(digamma(shape)) / rate.
// The caches are refreshed on every mutation.
class VariationalState {
 public:
  VariationalState() = default;
  VariationalState(std::vector<Matrix> shape, std::vector<Matrix> rate);

  std::size_t order() const { return shape_.size(); }
  std::size_t rank() const {
    return shape_.empty() ? 0 : static_cast<std::size_t>(shape_[0].cols());
  }
  Shape dims() const;

  const Matrix& shape(std::size_t m) const { return shape_.at(m); }
  const Matrix& rate(std::size_t m) const { return rate_.at(m); }
  const Matrix& arithmetic(std::size_t m) const { return arith_.at(m); }
  const Matrix& geometric(std::size_t m) const { return geom_.at(m); }
  std::span<const Matrix> arithmetic() const { return arith_; }
  std::span<const Matrix> geometric() const { return geom_; }

  void SetShape(std::size_t m, Matrix shape);
  void SetRate(std::size_t m, Matrix rate);
  void SetMode(std::size_t m, Matrix shape, Matrix rate);

  bool operator==(const VariationalState&) const;

 private:
  void Refresh(std::size_t m);

  std::vector<Matrix> shape_;
  std::vector<Matrix> rate_;
  std::vector<Matrix> arith_;
  std::vector<Matrix> geom_;
};

VariationalState InitState(const Shape& dims, const FitConfig& config,
                           const Hyperparameters& hyper);

// New shape parameters for `mode` given geometric expectations of every
// mode: alpha + sum over stored entries of y * G_k / sum_k' G_k'. Visits
// stored entries only. Throws NumericalError when sum_k' G_k' underflows
// to zero at an entry.
Matrix ShapeUpdate(const SparseCountTensor& t,
                   std::span<const Matrix> geometric, std::size_t mode,
                   double alpha);

// New rate parameters for `mode`: prior_rate plus the sum, over observed
// cells in each row, of prod_{m' != mode} E[theta_m'].
Matrix RateUpdate(std::span<const Matrix> arithmetic, std::size_t mode,
                  double prior_rate, const CellMask* observed = nullptr);

void UpdateGamma(VariationalState& state, const SparseCountTensor& t,
                 std::size_t mode, const Hyperparameters& hyper);
void UpdateDelta(VariationalState& state, std::size_t mode,
                 const Hyperparameters& hyper,
                 const CellMask* observed = nullptr);
// Returns the re-estimated beta for `mode`.
double UpdateBeta(const VariationalState& state, std::size_t mode,
                  BetaRule rule = BetaRule::kInverseSum);

// Evidence lower bound with the latent-source bound on the Poisson term
// made tight: sum over observed entries of y log sum_k G_k - log y!, minus
// the expected reconstruction mass of the observed region, plus Gamma prior
// cross terms and Gamma entropies of every factor.
double ComputeElbo(const VariationalState& state, const SparseCountTensor& t,
                   const Hyperparameters& hyper,
                   const CellMask* observed = nullptr);

struct BptfFit {
  VariationalState state;
  Hyperparameters hyper;
  FitTrace trace;
};

BptfFit Fit(const SparseCountTensor& t, const FitConfig& config,
            const Hyperparameters& hyper);
// Runs coordinate-ascent sweeps from `init`; only observed cells contribute
// when `observed` is set.
BptfFit Fit(const SparseCountTensor& t, const FitConfig& config,
            const Hyperparameters& hyper, VariationalState init,
            const CellMask* observed);

FactorSet PointEstimateOf(const VariationalState& state, PointEstimate kind);

// Freezes every mode but the last (time) mode at the trained values and
// infers time-step parameters for `test` from its observed cells. Beta is
// not re-estimated. Throws ConfigError when the observed region is empty.
BptfFit InferHeldoutTimeFactors(const VariationalState& trained,
                                const Hyperparameters& hyper,
                                const SparseCountTensor& test,
                                const CellMask& observed,
                                const FitConfig& config);

// State files: "<stem>.manifest" with hyperparameters plus per-mode shape
// and rate matrices in the FactorSet matrix format.
void WriteState(const std::string& dir, const std::string& stem,
                const VariationalState& state, const Hyperparameters& hyper,
                const std::string& labels_file = "");
struct LoadedState {
  VariationalState state;
  Hyperparameters hyper;
  std::string labels_file;
};
LoadedState ReadState(const std::string& manifest_path);

// Header plus one "iteration<TAB>elbo<TAB>beta0..." row per sweep.
void WriteTrace(std::ostream& out, const FitTrace& trace);

}  // namespace ptf

#endif  // PTF_BPTF_HPP_
