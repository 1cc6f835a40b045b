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

#include "modelid/acquisition.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

namespace modelid {
namespace {

// Independent EI for minimization, written directly from the definition
// E[max(0, best - xi - Y)] with Y ~ N(mean, variance).
double ReferenceEi(double mean, double variance, double best, double xi) {
  const double gap = best - xi - mean;
  if (variance <= 0.0) return gap > 0.0 ? gap : 0.0;
  const double s = std::sqrt(variance);
  const double z = gap / s;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  const double cdf = 0.5 * (1.0 + std::erf(z / std::sqrt(2.0)));
  return std::max(0.0, gap * cdf + s * pdf);
}

int BruteForceArgmax(const GpSurrogate& gp, const std::vector<Vector>& grid,
                     double xi) {
  double best_target = gp.targets().front();
  for (double t : gp.targets()) best_target = std::min(best_target, t);
  int arg = 0;
  double top = -1.0;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    const auto p = gp.Predict(grid[i]);
    const double ei = ReferenceEi(p.mean, p.variance, best_target, xi);
    if (ei > top) {
      top = ei;
      arg = i;
    }
  }
  return arg;
}

TEST(ExpectedImprovementTest, NoImprovementPossible) {
  EXPECT_EQ(ExpectedImprovement(2.0, 0.0, 2.0, 0.0), 0.0);
}

TEST(ExpectedImprovementTest, DeterministicImprovement) {
  EXPECT_DOUBLE_EQ(ExpectedImprovement(1.0, 0.0, 2.0, 0.0), 1.0);
}

TEST(ExpectedImprovementTest, UnitVarianceAtBestMatchesMonteCarlo) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  double sum = 0.0;
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) sum += std::max(0.0, -normal(rng));
  const double mc = sum / draws;
  const double ei = ExpectedImprovement(0.0, 1.0, 0.0, 0.0);
  EXPECT_NEAR(ei, mc, 1e-3);
  EXPECT_NEAR(ei, 0.398942, 1e-6);
}

TEST(ExpectedImprovementTest, NeverNegative) {
  for (double mean : {-3.0, 0.0, 5.0}) {
    for (double var : {0.0, 1e-12, 0.5, 4.0}) {
      EXPECT_GE(ExpectedImprovement(mean, var, 0.0, 0.01), 0.0);
    }
  }
}

TEST(ArgmaxEiTest, EmptyCandidatesRejected) {
  const auto gp = GpSurrogate::Fit({Vector::Constant(1, 0.5)}, {1.0},
                                   KernelParams::Isotropic(1, 0.2));
  EXPECT_THROW(ArgmaxEiIndex(gp, {}, AcquisitionConfig{}),
               std::invalid_argument);
}

TEST(ArgmaxEiTest, TiesResolveToFirstCandidate) {
  const Vector x = Vector::Constant(1, 0.3);
  const auto gp =
      GpSurrogate::Fit({x}, {1.0}, KernelParams::Isotropic(1, 0.2));
  const std::vector<Vector> candidates(5, x);
  EXPECT_EQ(ArgmaxEiIndex(gp, candidates, AcquisitionConfig{}), 0);
}

TEST(ArgmaxEiTest, MatchesBruteForceOnRandomSmallGrids) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 3;
    const int res = dim == 1 ? 200 : (dim == 2 ? 30 : 10);
    const ParameterSpace space = UnitCube(dim, res);
    const auto grid = space.UnitGrid();
    ASSERT_LE(grid.size(), 1000u);
    std::vector<Vector> inputs;
    std::vector<double> targets;
    const int n = 2 + trial % 6;
    for (int i = 0; i < n; ++i) {
      Vector x(dim);
      for (int k = 0; k < dim; ++k) x[k] = unit(rng);
      inputs.push_back(x);
      targets.push_back(normal(rng));
    }
    const auto gp = GpSurrogate::Fit(
        inputs, targets, KernelParams::Isotropic(dim, 0.1 + 0.3 * unit(rng)));
    AcquisitionConfig config;
    config.xi = trial % 2 == 0 ? 0.0 : 0.01;
    EXPECT_EQ(ArgmaxEiIndex(gp, grid, config),
              BruteForceArgmax(gp, grid, config.xi))
        << "trial " << trial;
  }
}

TEST(ArgmaxEiTest, TwoPointExampleFavorsLowErrorRegion) {
  const auto gp = GpSurrogate::Fit(
      {Vector::Constant(1, 0.2), Vector::Constant(1, 0.8)}, {5.0, 1.0},
      KernelParams::Isotropic(1, 0.2));
  const auto grid = UnitCube(1, 101).UnitGrid();
  AcquisitionConfig config;
  const int arg = ArgmaxEiIndex(gp, grid, config);
  EXPECT_EQ(arg, BruteForceArgmax(gp, grid, config.xi));
  EXPECT_GT(grid[arg][0], 0.5);
}

TEST(MakeCandidatesTest, SmallSpacesUseTheFullGrid) {
  const auto c = MakeCandidates(UnitCube(2, 50), AcquisitionConfig{}, 1);
  EXPECT_EQ(c.size(), 2500u);
}

TEST(MakeCandidatesTest, LargeSpacesUseSeededRandomCandidates) {
  AcquisitionConfig config;
  config.candidate_count = 300;
  const auto a = MakeCandidates(UnitCube(6), config, 4);
  const auto b = MakeCandidates(UnitCube(6), config, 4);
  ASSERT_EQ(a.size(), 300u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_TRUE((a[i].array() >= 0.0).all() && (a[i].array() <= 1.0).all());
  }
}

}  // namespace
}  // namespace modelid
