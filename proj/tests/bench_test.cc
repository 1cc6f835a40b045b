// Copyright 2026 The modelid Authors.
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


#include "modelid/bench.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace modelid {
namespace {

namespace fs = std::filesystem;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("modelid_bench_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

ExperimentConfig RandomPushConfig(const fs::path& out) {
  ExperimentConfig config = ExperimentConfig::Defaults("push");
  config.methods = {"random"};
  config.budget = 10;
  config.seeds = {0, 1};
  config.out_dir = out.string();
  return config;
}

ResultRow Row(const std::string& method, std::uint64_t seed, int iteration,
              double best, std::vector<double> relerr) {
  ResultRow r;
  r.method = method;
  r.seed = seed;
  r.iteration = iteration;
  r.error = best;
  r.best_error_so_far = best;
  r.best_test_error = best;
  r.relerr_pct = Eigen::Map<const Vector>(relerr.data(),
                                          static_cast<Eigen::Index>(relerr.size()));
  return r;
}

TEST(RunExperimentTest, RandomBudgetTenTwoSeedsWritesTwentyRows) {
  const fs::path out = FreshDir("rows");
  const ExperimentOutcome outcome = RunExperiment(RandomPushConfig(out));
  EXPECT_EQ(outcome.rows.size(), 20u);

  std::vector<std::string> names;
  const auto rows = ReadResultCsv((out / "random.csv").string(), &names);
  ASSERT_EQ(rows.size(), 20u);
  EXPECT_EQ(names, (std::vector<std::string>{"m", "mu"}));
  std::map<std::uint64_t, int> per_seed;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ++per_seed[rows[i].seed];
    if (i > 0 && rows[i].seed == rows[i - 1].seed) {
      EXPECT_EQ(rows[i].iteration, rows[i - 1].iteration + 1);
      EXPECT_LE(rows[i].best_error_so_far, rows[i - 1].best_error_so_far);
    }
    EXPECT_GE(rows[i].error, rows[i].best_error_so_far);
  }
  EXPECT_EQ(per_seed[0], 10);
  EXPECT_EQ(per_seed[1], 10);
  for (const char* file : {"final_errors.csv", "summary.csv",
                           "param_errors.csv", "curves.csv", "config.json"}) {
    EXPECT_TRUE(fs::exists(out / file)) << file;
  }
  fs::remove_all(out);
}

TEST(RunExperimentTest, ResultFilesRecordConfigAndReproduceAfterTimestamp) {
  const fs::path a = FreshDir("det_a");
  const fs::path b = FreshDir("det_b");
  ExperimentConfig config = RandomPushConfig(a);
  config.methods = {"random", "bo-full"};
  RunExperiment(config);
  config.out_dir = b.string();
  RunExperiment(config);
  for (const char* file : {"random.csv", "bo-full.csv", "final_errors.csv",
                           "summary.csv", "param_errors.csv", "curves.csv"}) {
    auto la = ReadLines(a / file);
    auto lb = ReadLines(b / file);
    ASSERT_GE(la.size(), 3u) << file;
    EXPECT_EQ(la[0].rfind("# generated ", 0), 0u) << file;
    EXPECT_EQ(la[1].rfind("# config ", 0), 0u) << file;
    // The config echo names the output directory, so compare it with the
    // directory normalized away.
    la[1].replace(la[1].find(a.string()), a.string().size(), "OUT");
    lb[1].replace(lb[1].find(b.string()), b.string().size(), "OUT");
    la.erase(la.begin());
    lb.erase(lb.begin());
    EXPECT_EQ(la, lb) << file;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RunExperimentTest, MissingModelFileFailsBeforeAnyOutput) {
  const fs::path out = FreshDir("missing");
  ExperimentConfig config = RandomPushConfig(out);
  config.methods = {"bo-ae-dyn"};
  config.ae_model = (out / "does_not_exist.json").string();
  try {
    RunExperiment(config);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("does_not_exist.json"),
              std::string::npos);
  }
  EXPECT_FALSE(fs::exists(out));
}

TEST(RunExperimentTest, ReportRebuildsFromResultFiles) {
  const fs::path out = FreshDir("report");
  const ExperimentOutcome outcome = RunExperiment(RandomPushConfig(out));
  const std::vector<std::string> before = ReadLines(out / "summary.csv");
  fs::remove(out / "summary.csv");
  const auto summary = ReportFromDirectory(out.string());
  ASSERT_EQ(summary.size(), 1u);
  EXPECT_EQ(summary[0].method, "random");
  EXPECT_EQ(summary[0].runs, 2);
  EXPECT_DOUBLE_EQ(summary[0].median_final_test_error,
                   outcome.summary[0].median_final_test_error);
  const std::vector<std::string> after = ReadLines(out / "summary.csv");
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 1; i < before.size(); ++i) EXPECT_EQ(before[i], after[i]);
  EXPECT_THROW(ReportFromDirectory((out / "nothing_here").string()),
               std::runtime_error);
  fs::remove_all(out);
}

TEST(ExperimentConfigTest, JsonRoundTripAndValidation) {
  ExperimentConfig config = ExperimentConfig::Defaults("structure");
  config.methods = {"random", "bo-vae"};
  config.seeds = {3, 5};
  config.budget = 17;
  config.training.ae_box = "symmetric";
  const ExperimentConfig back = ExperimentConfig::FromJson(config.ToJson());
  EXPECT_EQ(back.ToJson(), config.ToJson());
  EXPECT_EQ(back.latent_dim, 5);
  EXPECT_NO_THROW(back.Validate());

  auto broken = [&](auto mutate) {
    ExperimentConfig c = config;
    mutate(c);
    return c;
  };
  EXPECT_THROW(broken([](auto& c) { c.methods = {"gradient-descent"}; }).Validate(),
               std::invalid_argument);
  EXPECT_THROW(broken([](auto& c) { c.latent_dim = 12; }).Validate(),
               std::invalid_argument);
  EXPECT_THROW(broken([](auto& c) { c.budget = 0; }).Validate(),
               std::invalid_argument);
  EXPECT_THROW(broken([](auto& c) { c.seeds.clear(); }).Validate(),
               std::invalid_argument);
  EXPECT_THROW(broken([](auto& c) { c.simulator = "pendulum"; }).Validate(),
               std::invalid_argument);
  EXPECT_THROW(broken([](auto& c) { c.training.ae_box = "round"; }).Validate(),
               std::invalid_argument);
}

TEST(ExperimentConfigTest, PartialJsonTakesSimulatorDefaults) {
  const ExperimentConfig c =
      ExperimentConfig::FromJson({{"simulator", "push"}, {"budget", 7}});
  EXPECT_EQ(c.budget, 7);
  EXPECT_EQ(c.latent_dim, ExperimentConfig::Defaults("push").latent_dim);
}

TEST(BenchmarkTest, RelativeErrorOfTruthAndScaledTruth) {
  ExperimentConfig config = ExperimentConfig::Defaults("push");
  const Benchmark bench(config);
  const ParamVector truth = DefaultTruth("push");
  EXPECT_TRUE(bench.RelativeErrorPct(truth).isZero(0.0));
  EXPECT_EQ(bench.ObservedError(truth), 0.0);
  const Vector rel = bench.RelativeErrorPct(1.1 * truth);
  for (int i = 0; i < rel.size(); ++i) EXPECT_NEAR(rel[i], 10.0, 1e-9);
}

TEST(BenchmarkTest, StructureTruthReproducesObservedTrajectories) {
  ExperimentConfig config = ExperimentConfig::Defaults("structure");
  config.horizon = 20;
  const Benchmark bench(config);
  EXPECT_EQ(bench.observed().size(), 5u);
  EXPECT_EQ(bench.test().size(), 5u);
  EXPECT_EQ(bench.ObservedError(DefaultTruth("structure")), 0.0);
  EXPECT_TRUE(bench.RelativeErrorPct(DefaultTruth("structure")).isZero(0.0));
}

TEST(ParamErrorTableTest, PopulationMeanAndStd) {
  const std::vector<ResultRow> rows = {
      Row("random", 0, 1, 5.0, {9.0, 0.0}), Row("random", 0, 2, 4.0, {2.0, 0.0}),
      Row("random", 1, 1, 3.0, {4.0, 0.0})};
  const auto table = ParamErrorTable(rows, {"a", "b"});
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[0].parameter, "a");
  EXPECT_DOUBLE_EQ(table[0].mean_pct, 3.0);
  EXPECT_DOUBLE_EQ(table[0].std_pct, 1.0);
  EXPECT_EQ(table[1].mean_pct, 0.0);
  EXPECT_EQ(table[1].std_pct, 0.0);
}

TEST(EmitCurvesTest, SingleSeedHasZeroBand) {
  const std::vector<ResultRow> rows = {Row("bo-full", 4, 1, 3.0, {0}),
                                       Row("bo-full", 4, 2, 2.0, {0}),
                                       Row("bo-full", 4, 3, 2.0, {0})};
  const auto curves = EmitCurves(rows);
  ASSERT_EQ(curves.size(), 3u);
  for (const auto& c : curves) {
    EXPECT_EQ(c.q25, c.q75);
    EXPECT_EQ(c.median, c.q25);
  }
}

TEST(EmitCurvesTest, MatchesIndependentAggregation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ResultRow> rows;
  for (const std::string method : {"random", "bo-rembo"}) {
    for (std::uint64_t seed = 0; seed < 7; ++seed) {
      double best = std::numeric_limits<double>::infinity();
      for (int it = 1; it <= 12; ++it) {
        best = std::min(best, 10.0 * unit(rng));
        rows.push_back(Row(method, seed, it, best, {0}));
      }
    }
  }
  const auto curves = EmitCurves(rows);
  ASSERT_EQ(curves.size(), 24u);
  std::map<std::string, double> last;
  for (const auto& c : curves) {
    // Independent aggregation: sorted sample, median of 7 is element 3,
    // quartiles at positions 1.5 and 4.5.
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.method == c.method && r.iteration == c.iteration) {
        v.push_back(r.best_error_so_far);
      }
    }
    ASSERT_EQ(v.size(), 7u);
    std::sort(v.begin(), v.end());
    EXPECT_DOUBLE_EQ(c.median, v[3]);
    EXPECT_DOUBLE_EQ(c.q25, 0.5 * (v[1] + v[2]));
    EXPECT_DOUBLE_EQ(c.q75, 0.5 * (v[4] + v[5]));
    if (last.count(c.method)) EXPECT_LE(c.median, last[c.method]);
    last[c.method] = c.median;
  }
}

TEST(QuantileTest, LinearInterpolation) {
  EXPECT_EQ(Quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_EQ(Quantile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  EXPECT_EQ(Quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25), 2.0);
  EXPECT_EQ(Quantile({7.0}, 0.75), 7.0);
  EXPECT_THROW(Quantile({}, 0.5), std::invalid_argument);
  EXPECT_THROW(Quantile({1.0}, 1.5), std::invalid_argument);
}

TEST(SummarizeTest, MedianOfFinalRowsPerMethod) {
  const std::vector<ResultRow> rows = {
      Row("random", 0, 1, 9.0, {0}), Row("random", 0, 2, 4.0, {0}),
      Row("random", 1, 1, 2.0, {0}), Row("random", 2, 1, 6.0, {0})};
  const auto finals = FinalErrors(rows);
  ASSERT_EQ(finals.size(), 3u);
  const auto summary = Summarize(rows);
  ASSERT_EQ(summary.size(), 1u);
  EXPECT_EQ(summary[0].runs, 3);
  EXPECT_EQ(summary[0].median_final_error, 4.0);
}

TEST(MethodIdsTest, CanonicalOrder) {
  EXPECT_EQ(MethodIds(), (std::vector<std::string>{"random", "bo-full", "bo-rembo",
                                                   "bo-vae", "bo-ae-dyn"}));
  EXPECT_FALSE(IsLatentMethod("bo-full"));
  EXPECT_TRUE(IsLatentMethod("bo-rembo"));
  EXPECT_TRUE(IsLatentMethod("bo-vae"));
  EXPECT_TRUE(IsLatentMethod("bo-ae-dyn"));
}

}  // namespace
}  // namespace modelid
