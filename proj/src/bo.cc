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

#include "modelid/bo.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "modelid/csv.h"
#include "modelid/random.h"

namespace modelid {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Seed streams for the loop's random draws.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kCandidateStream = 2;
constexpr std::uint64_t kHyperStream = 3;
constexpr std::uint64_t kFallbackStream = 4;

class Clock {
 public:
  explicit Clock(std::optional<double> limit)
      : limit_(limit), start_(std::chrono::steady_clock::now()) {}
  bool Expired() const {
    if (!limit_) return false;
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start_;
    return elapsed.count() >= *limit_;
  }

 private:
  std::optional<double> limit_;
  std::chrono::steady_clock::time_point start_;
};

// In-place (y - mean) / std; a constant sample is only centered.
void Standardize(std::vector<double>* ys) {
  double mean = 0.0;
  for (double y : *ys) mean += y;
  mean /= static_cast<double>(ys->size());
  double var = 0.0;
  for (double y : *ys) var += (y - mean) * (y - mean);
  var /= static_cast<double>(ys->size());
  const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
  for (double& y : *ys) y = (y - mean) / scale;
}

IdentificationResult Finish(std::vector<Evaluation> history,
                            double temperature) {
  IdentificationResult result;
  result.best_error = kInf;
  for (const auto& e : history) {
    if (e.error < result.best_error) {
      result.best_error = e.error;
      result.best_theta = e.theta;
    }
  }
  if (!std::isfinite(result.best_error)) {
    throw std::runtime_error(
        "identification: budget exhausted without a successful simulation");
  }
  if (temperature <= 0.0) temperature = DefaultTemperature(history);
  result.posterior = PosteriorDistribution(history, temperature);
  result.history = std::move(history);
  return result;
}

}  // namespace

double TrajectoryError(const BlackBoxSimulator& sim, const Trajectory& observed,
                       const ParamVector& theta) {
  double total = 0.0;
  try {
    for (int i = 0; i < observed.horizon(); ++i) {
      const Vector predicted =
          sim.Step(observed.states[i], observed.controls[i], theta);
      if (!predicted.allFinite()) return kInf;
      total += (observed.states[i + 1] - predicted).norm();
    }
  } catch (const SimulationDiverged&) {
    return kInf;
  }
  return std::isfinite(total) ? total : kInf;
}

double TrajectoryError(const BlackBoxSimulator& sim,
                       const std::vector<Trajectory>& observed,
                       const ParamVector& theta) {
  double total = 0.0;
  for (const auto& traj : observed) {
    total += TrajectoryError(sim, traj, theta);
    if (!std::isfinite(total)) return kInf;
  }
  return total;
}

void BudgetSpec::Validate() const {
  if (max_evaluations < 1) {
    throw std::invalid_argument("BudgetSpec: max_evaluations must be >= 1");
  }
  if (wall_clock_seconds && !(*wall_clock_seconds > 0.0)) {
    throw std::invalid_argument("BudgetSpec: wall clock limit must be > 0");
  }
}

std::vector<double> IdentificationResult::BestSoFar() const {
  std::vector<double> out;
  double best = kInf;
  for (const auto& e : history) {
    best = std::min(best, e.error);
    out.push_back(best);
  }
  return out;
}

double DefaultTemperature(const std::vector<Evaluation>& history) {
  std::vector<double> finite;
  for (const auto& e : history) {
    if (std::isfinite(e.error)) finite.push_back(e.error);
  }
  if (finite.empty()) return 1.0;
  std::sort(finite.begin(), finite.end());
  const std::size_t n = finite.size();
  const double median = n % 2 == 1
                            ? finite[n / 2]
                            : 0.5 * (finite[n / 2 - 1] + finite[n / 2]);
  if (median > 0.0) return median;
  // All-zero or mostly-zero errors: fall back to the largest finite error,
  // then to unit temperature.
  return finite.back() > 0.0 ? finite.back() : 1.0;
}

DiscreteDistribution PosteriorDistribution(
    const std::vector<Evaluation>& history, double temperature) {
  if (history.empty()) {
    throw std::invalid_argument("PosteriorDistribution: empty history");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("PosteriorDistribution: temperature <= 0");
  }
  double min_error = kInf;
  for (const auto& e : history) min_error = std::min(min_error, e.error);
  if (!std::isfinite(min_error)) {
    throw std::invalid_argument(
        "PosteriorDistribution: all evaluations failed");
  }
  DiscreteDistribution dist;
  double total = 0.0;
  for (const auto& e : history) {
    // shifted by the minimum so the argmin has weight exp(0)
    const double w = std::isfinite(e.error)
                         ? std::exp(-(e.error - min_error) / temperature)
                         : 0.0;
    dist.support.push_back(e.theta);
    dist.weights.push_back(w);
    total += w;
  }
  for (double& w : dist.weights) w /= total;
  return dist;
}

void WriteHistoryHeader(std::ostream& out, const ParameterSpace& space) {
  out << "iteration";
  for (const auto& name : space.names()) out << ',' << name;
  out << ",error,best_so_far\n";
}

void WriteHistoryRow(std::ostream& out, const Evaluation& e, double best) {
  out << e.iteration;
  for (int i = 0; i < e.theta.size(); ++i) out << ',' << FormatDouble(e.theta[i]);
  out << ',' << FormatDouble(e.error) << ',' << FormatDouble(best) << '\n';
}

IdentificationResult Identify(const ErrorFunction& error,
                              const ParameterSpace& space, const LatentMap* map,
                              const BudgetSpec& budget, std::uint64_t seed,
                              const BoOptions& options) {
  budget.Validate();
  options.acquisition.Validate();
  if (map != nullptr && map->target_space().dim() != space.dim()) {
    throw std::invalid_argument(
        "Identify: latent map decodes to a different dimension");
  }

  const ParameterSpace search = map != nullptr
                                    ? map->latent_space().WithGridRes(
                                          options.grid_res)
                                    : space.WithGridRes(options.grid_res);
  const int dim = search.dim();
  const int n_init = std::min(budget.max_evaluations,
                              options.n_init.value_or(std::max(5, dim)));

  auto decode = [&](const Vector& unit) -> ParamVector {
    const Vector point = search.Denormalize(unit);
    ParamVector theta = map != nullptr ? map->Decode(point) : point;
    // The box is closed; keep rounding from leaking outside it.
    return theta.cwiseMax(space.lower()).cwiseMin(space.upper());
  };

  const Clock clock(budget.wall_clock_seconds);
  std::vector<Evaluation> history;
  std::vector<Vector> unit_points;
  double best = kInf;
  if (options.log_csv != nullptr) WriteHistoryHeader(*options.log_csv, space);

  auto evaluate = [&](const Vector& unit) {
    Evaluation e;
    e.iteration = static_cast<int>(history.size());
    e.search_point = search.Denormalize(unit);
    e.theta = decode(unit);
    e.error = error(e.theta);
    if (std::isnan(e.error)) e.error = kInf;
    best = std::min(best, e.error);
    if (options.log_csv != nullptr) WriteHistoryRow(*options.log_csv, e, best);
    history.push_back(std::move(e));
    unit_points.push_back(unit);
  };

  for (const auto& p : search.SampleUniform(MixSeed(seed, kInitStream), n_init)) {
    if (clock.Expired() && !history.empty()) break;
    evaluate(search.Normalize(p).cwiseMax(0.0).cwiseMin(1.0));
  }

  KernelParams kernel =
      KernelParams::Isotropic(dim, options.initial_length_scale, 1.0);
  int steps = 0;
  while (static_cast<int>(history.size()) < budget.max_evaluations &&
         !clock.Expired()) {
    const auto iter = static_cast<std::uint64_t>(history.size());
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < history.size(); ++i) {
      if (std::isfinite(history[i].error)) {
        xs.push_back(unit_points[i]);
        const double e = history[i].error;
        ys.push_back(options.log_errors ? std::log(e + options.log_floor) : e);
      }
    }
    if (xs.empty()) {
      // Nothing to model yet; keep sampling uniformly.
      const auto p = search.SampleUniform(MixSeed(seed, kFallbackStream + iter), 1);
      evaluate(search.Normalize(p.front()).cwiseMax(0.0).cwiseMin(1.0));
      continue;
    }

    // The surrogate models standardized errors, so xi and the kernel's
    // signal variance are in units of the error spread.
    Standardize(&ys);
    if (xs.size() >= 3 && options.hyper_refit_every > 0 &&
        steps % options.hyper_refit_every == 0) {
      KernelParams init = kernel;
      init.signal_var = 1.0;
      HyperSearchOptions hyper = options.hyper;
      hyper.seed = MixSeed(seed, kHyperStream + iter);
      kernel = OptimizeHyperparams(xs, ys, init, hyper);
    }
    ++steps;

    std::optional<Vector> next;
    try {
      const GpSurrogate gp = GpSurrogate::Fit(xs, ys, kernel);
      const auto candidates = MakeCandidates(
          search, options.acquisition, MixSeed(seed, kCandidateStream + iter));
      double max_ei = 0.0;
      const int index =
          ArgmaxEiIndex(gp, candidates, options.acquisition, &max_ei);
      // With no expected improvement anywhere the argmax degenerates to the
      // first candidate; explore uniformly instead.
      if (max_ei > 0.0) next = candidates[index];
    } catch (const std::runtime_error&) {
      // Surrogate could not be factorized; reset the kernel so the next
      // refit starts clean and explore uniformly.
      kernel = KernelParams::Isotropic(dim, options.initial_length_scale);
    }
    if (!next) {
      const auto p =
          search.SampleUniform(MixSeed(seed, kFallbackStream + iter), 1);
      next = search.Normalize(p.front()).cwiseMax(0.0).cwiseMin(1.0);
    }
    evaluate(*next);
  }

  return Finish(std::move(history), options.temperature);
}

IdentificationResult Identify(const BlackBoxSimulator& sim,
                              const std::vector<Trajectory>& observed,
                              const ParameterSpace& space, const LatentMap* map,
                              const BudgetSpec& budget, std::uint64_t seed,
                              const BoOptions& options) {
  for (const auto& t : observed) t.Validate();
  return Identify(
      [&](const ParamVector& theta) {
        return TrajectoryError(sim, observed, theta);
      },
      space, map, budget, seed, options);
}

IdentificationResult RandomSearch(const ErrorFunction& error,
                                  const ParameterSpace& space,
                                  const BudgetSpec& budget, std::uint64_t seed,
                                  double temperature, std::ostream* log_csv) {
  budget.Validate();
  const Clock clock(budget.wall_clock_seconds);
  std::vector<Evaluation> history;
  double best = kInf;
  if (log_csv != nullptr) WriteHistoryHeader(*log_csv, space);
  for (const auto& theta :
       space.SampleUniform(MixSeed(seed, kInitStream), budget.max_evaluations)) {
    if (clock.Expired() && !history.empty()) break;
    Evaluation e;
    e.iteration = static_cast<int>(history.size());
    e.theta = theta;
    e.search_point = theta;
    e.error = error(theta);
    if (std::isnan(e.error)) e.error = kInf;
    best = std::min(best, e.error);
    if (log_csv != nullptr) WriteHistoryRow(*log_csv, e, best);
    history.push_back(std::move(e));
  }
  return Finish(std::move(history), temperature);
}

IdentificationResult RandomSearch(const BlackBoxSimulator& sim,
                                  const std::vector<Trajectory>& observed,
                                  const ParameterSpace& space,
                                  const BudgetSpec& budget,
                                  std::uint64_t seed) {
  for (const auto& t : observed) t.Validate();
  return RandomSearch(
      [&](const ParamVector& theta) {
        return TrajectoryError(sim, observed, theta);
      },
      space, budget, seed);
}

}  // namespace modelid
