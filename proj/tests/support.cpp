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

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>

namespace ptf::testing {

std::vector<std::vector<Index>> AllCells(const Shape& shape) {
  std::vector<std::vector<Index>> cells;
  std::vector<Index> c(shape.size(), 0);
  while (true) {
    cells.push_back(c);
    std::size_t m = shape.size();
    while (m > 0) {
      --m;
      if (++c[m] < shape[m]) break;
      c[m] = 0;
      if (m == 0) return cells;
    }
    if (shape.empty()) return cells;
  }
}

SparseCountTensor RandomTensor(const Shape& shape, double density,
                               Count max_count, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<Count> count(1, max_count);
  std::vector<Index> coords;
  std::vector<Count> counts;
  for (const auto& c : AllCells(shape)) {
    if (!keep(rng)) continue;
    coords.insert(coords.end(), c.begin(), c.end());
    counts.push_back(count(rng));
  }
  return SparseCountTensor(shape, std::move(coords), std::move(counts));
}

FactorSet RandomFactors(const Shape& shape, std::size_t rank,
                        std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Matrix> mats;
  for (Index n : shape) {
    Matrix a(n, static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
    mats.push_back(std::move(a));
  }
  return FactorSet(std::move(mats));
}

VariationalState RandomState(const Shape& shape, std::size_t rank,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> g(0.2, 3.0), d(0.5, 2.0);
  std::vector<Matrix> gamma, delta;
  for (Index n : shape) {
    Matrix a(n, static_cast<Eigen::Index>(rank));
    Matrix b(n, static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = g(rng);
      b.data()[i] = d(rng);
    }
    gamma.push_back(std::move(a));
    delta.push_back(std::move(b));
  }
  return VariationalState(std::move(gamma), std::move(delta));
}

double CountAt(const SparseCountTensor& t, const std::vector<Index>& coord) {
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto c = t.coord(e);
    if (std::equal(c.begin(), c.end(), coord.begin())) {
      return static_cast<double>(t.count(e));
    }
  }
  return 0.0;
}

double LoopReconstruct(const FactorSet& f, const std::vector<Index>& coord) {
  double sum = 0.0;
  for (std::size_t k = 0; k < f.rank(); ++k) {
    double p = 1.0;
    for (std::size_t m = 0; m < f.order(); ++m) {
      p *= f.factor(m)(coord[m], static_cast<Eigen::Index>(k));
    }
    sum += p;
  }
  return sum;
}

bool InMask(const CellMask& mask, Index i, Index j) {
  const bool in_block =
      std::find(mask.rows.begin(), mask.rows.end(), i) != mask.rows.end() &&
      std::find(mask.cols.begin(), mask.cols.end(), j) != mask.cols.end();
  return in_block != mask.complement;
}

double QuadratureDigamma(double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double integral = integrator.integrate([x](double t) {
    if (t == 0.0) return 0.0;
    return t / ((t * t + x * x) * std::expm1(2.0 * std::numbers::pi * t));
  });
  return std::log(x) - 0.5 / x - 2.0 * integral;
}

Matrix LatentSourceShapeOracle(const SparseCountTensor& t,
                               const VariationalState& s, std::size_t mode,
                               double alpha) {
  const std::size_t order = s.order();
  const std::size_t rank = s.rank();
  Matrix out = Matrix::Constant(s.shape(mode).rows(), s.shape(mode).cols(),
                                alpha);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    const auto c = t.coord(e);
    std::vector<double> g(rank);
    double norm = 0.0;
    for (std::size_t k = 0; k < rank; ++k) {
      double log_g = 0.0;
      for (std::size_t m = 0; m < order; ++m) {
        const double shape = s.shape(m)(c[m], static_cast<Eigen::Index>(k));
        const double rate = s.rate(m)(c[m], static_cast<Eigen::Index>(k));
        log_g += boost::math::digamma(shape) - std::log(rate);
      }
      g[k] = std::exp(log_g);
      norm += g[k];
    }
    // Expected latent source counts E[z_k] = y * phi_k.
    for (std::size_t k = 0; k < rank; ++k) {
      out(c[mode], static_cast<Eigen::Index>(k)) +=
          static_cast<double>(t.count(e)) * g[k] / norm;
    }
  }
  return out;
}

Matrix DenseRateOracle(const Shape& shape, const VariationalState& s,
                       std::size_t mode, double prior_rate,
                       const CellMask* mask) {
  const std::size_t rank = s.rank();
  Matrix out = Matrix::Constant(shape[mode], static_cast<Eigen::Index>(rank),
                                prior_rate);
  for (const auto& c : AllCells(shape)) {
    if (mask && !InMask(*mask, c[0], c[1])) continue;
    for (std::size_t k = 0; k < rank; ++k) {
      double p = 1.0;
      for (std::size_t m = 0; m < shape.size(); ++m) {
        if (m == mode) continue;
        p *= s.shape(m)(c[m], static_cast<Eigen::Index>(k)) /
             s.rate(m)(c[m], static_cast<Eigen::Index>(k));
      }
      out(c[mode], static_cast<Eigen::Index>(k)) += p;
    }
  }
  return out;
}

double PairwiseGini(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double diff = 0.0, sum = 0.0;
  for (double a : v) {
    sum += a;
    for (double b : v) diff += std::abs(a - b);
  }
  return diff / (2.0 * n * n * (sum / n));
}

std::string ScratchDir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("ptf_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ptf::testing
