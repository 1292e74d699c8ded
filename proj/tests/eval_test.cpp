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

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ptf/error.hpp"
#include "ptf/eval.hpp"
#include "ptf/synth.hpp"
#include "support.hpp"

namespace ptf {
namespace {

TEST(Metrics, MaeExample) {
  const std::vector<double> yhat = {1, 1}, y = {0, 2};
  EXPECT_DOUBLE_EQ(Mae(yhat, y), 1.0);
  EXPECT_THROW(Mae(std::vector<double>{}, std::vector<double>{}), ConfigError);
  EXPECT_THROW(Mae(yhat, std::vector<double>{1.0}), ConfigError);
}

TEST(Metrics, MaeNonzero) {
  EXPECT_DOUBLE_EQ(*MaeNz(std::vector<double>{9, 3}, std::vector<double>{0, 3}), 0.0);
  EXPECT_DOUBLE_EQ(*MaeNz(std::vector<double>{2.5}, std::vector<double>{1}), 1.5);
  EXPECT_FALSE(MaeNz(std::vector<double>{1, 2}, std::vector<double>{0, 0}));
}

TEST(Metrics, HammingOnZeros) {
  EXPECT_DOUBLE_EQ(
      *HamZ(std::vector<double>{0.4, 0.6, 7}, std::vector<double>{0, 0, 3}), 0.5);
  // The threshold is strict.
  EXPECT_DOUBLE_EQ(*HamZ(std::vector<double>{0.5}, std::vector<double>{0}), 0.0);
  EXPECT_FALSE(HamZ(std::vector<double>{1}, std::vector<double>{4}));
}

TEST(ModelKind, NamesRoundTrip) {
  for (ModelKind m : {ModelKind::kBptfGeo, ModelKind::kBptfAri, ModelKind::kNtfKl,
                      ModelKind::kNtfLs}) {
    EXPECT_EQ(ParseModelKind(ToString(m)), m);
  }
  EXPECT_FALSE(ParseModelKind("svd"));
}

struct LoopMetrics {
  double cells = 0, nonzero = 0, abs_error = 0, abs_error_nz = 0, zero_hits = 0;
};

LoopMetrics EvaluateByLoop(const FactorSet& f, const SparseCountTensor& t,
                           const CellMask& region) {
  LoopMetrics r;
  for (const auto& c : testing::AllCells(t.shape())) {
    if (!testing::InMask(region, c[0], c[1])) continue;
    const double y = testing::CountAt(t, c), yhat = testing::LoopReconstruct(f, c);
    r.cells += 1;
    r.abs_error += std::abs(y - yhat);
    if (y > 0) {
      r.nonzero += 1;
      r.abs_error_nz += std::abs(y - yhat);
    } else if (yhat > 0.5) {
      r.zero_hits += 1;
    }
  }
  return r;
}

TEST(EvaluateRegion, MatchesCellLoop) {
  std::mt19937_64 rng(1);
  const Shape shape = {6, 6, 3, 4};
  const std::vector<CellMask> regions = {CellMask::TopBlock(3), CellMask::TopBlock(3, true),
                                         CellMask::All(6, 6),
                                         CellMask{{1, 4}, {0, 5, 2}, true}};
  for (int rep = 0; rep < 5; ++rep) {
    const auto t = testing::RandomTensor(shape, 0.3, 6, rng);
    const auto f = testing::RandomFactors(shape, 3, rng, 0.0, 1.2);
    for (const auto& region : regions) {
      const RegionMetrics got = EvaluateRegion(f, t, region);
      const LoopMetrics want = EvaluateByLoop(f, t, region);
      EXPECT_EQ(got.cells, want.cells);
      EXPECT_EQ(got.nonzero_cells, want.nonzero);
      EXPECT_NEAR(got.metrics.mae, want.abs_error / want.cells, 1e-12);
      if (want.nonzero > 0) {
        EXPECT_NEAR(*got.metrics.mae_nz, want.abs_error_nz / want.nonzero, 1e-12);
      }
      if (want.cells > want.nonzero) {
        EXPECT_NEAR(*got.metrics.ham_z, want.zero_hits / (want.cells - want.nonzero),
                    1e-15);
      }
      // Zero cells contribute |yhat| to the absolute error.
      EXPECT_NEAR(got.metrics.mae * got.cells,
                  got.abs_error_nonzero + got.abs_prediction_zero,
                  1e-12 * std::max(1.0, got.metrics.mae * got.cells));
    }
  }
}

TEST(ExperimentSpec, Validation) {
  ExperimentSpec spec;
  spec.n_prime = 10;
  EXPECT_NO_THROW(spec.Validate({20, 20, 3, 10}));
  EXPECT_THROW(spec.Validate({10, 10, 3, 10}), ConfigError);
  EXPECT_THROW(spec.Validate({20, 19, 3, 10}), ConfigError);
  EXPECT_THROW(spec.Validate({20, 20}), ConfigError);
  spec.n_prime = 20;
  EXPECT_THROW(spec.Validate({20, 20, 3, 10}), ConfigError);
  spec.n_prime = 10;
  spec.seeds.clear();
  EXPECT_THROW(spec.Validate({20, 20, 3, 10}), ConfigError);
  spec.seeds = {0};
  spec.test_fraction = 1.0;
  EXPECT_THROW(spec.Validate({20, 20, 3, 10}), ConfigError);
}

TEST(ExperimentSpec, ScenarioNamesAndRegions) {
  ExperimentSpec spec;
  spec.dataset = "I";
  spec.n_prime = 25;
  EXPECT_EQ(spec.ScenarioName(), "I-top-25");
  EXPECT_EQ(spec.HeldoutRegion(), CellMask::TopBlock(25));
  spec.predict_complement = true;
  EXPECT_EQ(spec.ScenarioName(), "I-top-25^c");
  EXPECT_EQ(spec.HeldoutRegion(), CellMask::TopBlock(25, true));
}

ExperimentSpec SmallSpec() {
  ExperimentSpec spec;
  spec.n_prime = 4;
  spec.rank = 3;
  spec.seeds = {0, 1};
  spec.test_fraction = 0.25;
  spec.bptf.max_iterations = 30;
  spec.ntf.max_iterations = 30;
  return spec;
}

SparseCountTensor SmallTensor() {
  SynthConfig sc;
  sc.shape = {12, 12, 3, 8};
  sc.rank = 3;
  sc.seed = 2;
  return SampleGenerative(sc).tensor;
}

TEST(RunExperiment, SingleModelReport) {
  ExperimentSpec spec = SmallSpec();
  spec.models = {ModelKind::kNtfKl};
  const EvalReport r = RunExperiment(spec, SmallTensor());
  EXPECT_EQ(r.scenario, "synthetic-top-4");
  ASSERT_EQ(r.models.size(), 1u);
  EXPECT_EQ(r.splits.size(), 2u);
  const ModelResult* m = r.Find(ModelKind::kNtfKl);
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(r.Find(ModelKind::kBptfGeo), nullptr);
  ASSERT_TRUE(m->mean);
  ASSERT_EQ(m->per_split.size(), 2u);
  EXPECT_NEAR(m->mean->mae, (m->per_split[0]->mae + m->per_split[1]->mae) / 2,
              1e-15);
  for (const auto& s : r.splits) EXPECT_EQ(s.heldout_cells, 16.0 * 3 * 2);  // block x actions x steps
}

TEST(RunExperiment, DeterministicAndThreadIndependent) {
  ExperimentSpec spec = SmallSpec();
  const auto t = SmallTensor();
  const EvalReport a = RunExperiment(spec, t);
  spec.threads = 2;
  const EvalReport b = RunExperiment(spec, t);
  ASSERT_EQ(a.models.size(), 4u);
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    ASSERT_TRUE(a.models[i].mean && b.models[i].mean);
    EXPECT_EQ(a.models[i].mean->mae, b.models[i].mean->mae);
    EXPECT_EQ(a.models[i].mean->ham_z, b.models[i].mean->ham_z);
  }
  std::ostringstream ta, tb;
  WriteReportTsv(ta, std::vector<EvalReport>{a});
  WriteReportTsv(tb, std::vector<EvalReport>{b});
  EXPECT_EQ(ta.str(), tb.str());
}

TEST(RunExperiment, WritersCoverEveryModel) {
  const EvalReport r = RunExperiment(SmallSpec(), SmallTensor());
  std::ostringstream tsv, table, json;
  const std::vector<EvalReport> reports = {r};
  WriteReportTsv(tsv, reports);
  WriteReportTable(table, reports);
  WriteReportJson(json, reports);
  std::istringstream lines(tsv.str());
  std::string header, line;
  std::getline(lines, header);
  EXPECT_EQ(header.rfind("scenario\tmodel", 0), 0u);
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_NE(table.str().find("synthetic-top-4"), std::string::npos);
  const auto doc = nlohmann::json::parse(json.str());
  ASSERT_TRUE(doc.is_array());
  EXPECT_EQ(doc[0]["scenario"], "synthetic-top-4");
}

}  // namespace
}  // namespace ptf
