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

// Trajectory-error objective and the Bayesian-optimization identification
// loop. The loop works on a unit-cube view of the search space, which is
// either the parameter box itself or the latent box of a LatentMap. Latent
// points are decoded (and clipped into the parameter box) before every
// simulation.

#ifndef MODELID_BO_H_
#define MODELID_BO_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "modelid/acquisition.h"
#include "modelid/gp.h"
#include "modelid/latent_map.h"
#include "modelid/param_space.h"
#include "modelid/simulator.h"

namespace modelid {

// Sum over steps of ||x_{i+1} - f(x_i, u_i, theta)||_2, each step re-anchored
// at the observed state. Divergence yields +inf instead of throwing.
double TrajectoryError(const BlackBoxSimulator& sim, const Trajectory& observed,
                       const ParamVector& theta);
double TrajectoryError(const BlackBoxSimulator& sim,
                       const std::vector<Trajectory>& observed,
                       const ParamVector& theta);

struct BudgetSpec {
  int max_evaluations = 0;
  std::optional<double> wall_clock_seconds;

  void Validate() const;
};

struct Evaluation {
  int iteration = 0;
  ParamVector theta;
  // Point in the search space (native latent or parameter coordinates).
  Vector search_point;
  double error = 0.0;
};

struct DiscreteDistribution {
  std::vector<ParamVector> support;
  std::vector<double> weights;
};

struct IdentificationResult {
  ParamVector best_theta;
  double best_error = 0.0;
  std::vector<Evaluation> history;
  DiscreteDistribution posterior;

  // Running minimum of the history errors.
  std::vector<double> BestSoFar() const;
};

// Softmin weights exp(-error / temperature) over evaluated parameters.
// Infinite errors get zero weight; throws when all errors are infinite.
DiscreteDistribution PosteriorDistribution(
    const std::vector<Evaluation>& history, double temperature);

// Median of the finite errors, the default softmin temperature.
double DefaultTemperature(const std::vector<Evaluation>& history);

struct BoOptions {
  AcquisitionConfig acquisition;
  // Points per search dimension when the candidate grid is enumerable.
  int grid_res = 100;
  int hyper_refit_every = 5;
  // Defaults to max(5, search dimension).
  std::optional<int> n_init;
  double initial_length_scale = 0.2;
  HyperSearchOptions hyper;
  // Fit the surrogate to log(error + log_floor) instead of the raw error.
  // Either way the targets are standardized before fitting.
  bool log_errors = true;
  double log_floor = 1e-12;
  // <= 0 selects DefaultTemperature.
  double temperature = 0.0;
  // Receives one CSV row per evaluation when set.
  std::ostream* log_csv = nullptr;
};

using ErrorFunction = std::function<double(const ParamVector&)>;

// Identification by Bayesian optimization over `space` (or over map's latent
// box when `map` is non-null). Deterministic for a fixed seed when no wall
// clock limit is set. Throws std::runtime_error if no evaluation is finite.
IdentificationResult Identify(const ErrorFunction& error,
                              const ParameterSpace& space, const LatentMap* map,
                              const BudgetSpec& budget, std::uint64_t seed,
                              const BoOptions& options = {});

IdentificationResult Identify(const BlackBoxSimulator& sim,
                              const std::vector<Trajectory>& observed,
                              const ParameterSpace& space, const LatentMap* map,
                              const BudgetSpec& budget, std::uint64_t seed,
                              const BoOptions& options = {});

// Uniform sampling baseline with the same result shape as Identify.
IdentificationResult RandomSearch(const ErrorFunction& error,
                                  const ParameterSpace& space,
                                  const BudgetSpec& budget, std::uint64_t seed,
                                  double temperature = 0.0,
                                  std::ostream* log_csv = nullptr);

IdentificationResult RandomSearch(const BlackBoxSimulator& sim,
                                  const std::vector<Trajectory>& observed,
                                  const ParameterSpace& space,
                                  const BudgetSpec& budget, std::uint64_t seed);

// Header and row writers for the per-evaluation log
// (iteration, <param names...>, error, best_so_far).
void WriteHistoryHeader(std::ostream& out, const ParameterSpace& space);
void WriteHistoryRow(std::ostream& out, const Evaluation& e, double best);

}  // namespace modelid

#endif  // MODELID_BO_H_
