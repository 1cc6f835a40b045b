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

#include "modelid/gp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace modelid {
namespace {

constexpr double kMergeDistance = 1e-10;
constexpr double kMinLogLength = -6.907755278982137;  // log(1e-3)
constexpr double kMaxLogLength = 4.605170185988092;   // log(1e2)
constexpr double kMinLogNoise = -27.631021115928547;  // log(1e-12)

// Cholesky of K + (noise + jitter) I with jitter escalation. Returns false
// when even the largest jitter fails.
bool FactorWithJitter(const Eigen::MatrixXd& k, double noise_var,
                      Eigen::MatrixXd* chol, double* jitter) {
  for (double j = kInitialJitter; j <= kMaxJitter * 1.0000001; j *= 10.0) {
    Eigen::MatrixXd reg = k;
    reg.diagonal().array() += noise_var + j;
    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() == Eigen::Success) {
      *chol = llt.matrixL();
      *jitter = j;
      return true;
    }
  }
  return false;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void CheckData(const std::vector<Vector>& inputs,
               const std::vector<double>& targets) {
  if (inputs.empty()) throw std::invalid_argument("GP: no data points");
  if (inputs.size() != targets.size()) {
    throw std::invalid_argument("GP: inputs and targets differ in length");
  }
  const auto d = inputs.front().size();
  for (const auto& x : inputs) {
    if (x.size() != d) {
      throw std::invalid_argument("GP: inputs have inconsistent dimension");
    }
  }
  for (double t : targets) {
    if (!std::isfinite(t)) throw std::invalid_argument("GP: non-finite target");
  }
}

// Collapses near-duplicate inputs, averaging their targets.
void MergeDuplicates(const std::vector<Vector>& inputs,
                     const std::vector<double>& targets,
                     std::vector<Vector>* merged_inputs,
                     std::vector<double>* merged_targets) {
  std::vector<int> counts;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < merged_inputs->size(); ++j) {
      if (((*merged_inputs)[j] - inputs[i]).norm() < kMergeDistance) {
        (*merged_targets)[j] += targets[i];
        ++counts[j];
        found = true;
        break;
      }
    }
    if (!found) {
      merged_inputs->push_back(inputs[i]);
      merged_targets->push_back(targets[i]);
      counts.push_back(1);
    }
  }
  for (std::size_t j = 0; j < counts.size(); ++j) {
    (*merged_targets)[j] /= counts[j];
  }
}

}  // namespace

KernelParams KernelParams::Isotropic(int dim, double length_scale,
                                     double signal_var, double noise_var) {
  KernelParams k;
  k.signal_var = signal_var;
  k.length_scales = Vector::Constant(dim, length_scale);
  k.noise_var = noise_var;
  return k;
}

void KernelParams::Validate() const {
  if (!(signal_var > 0.0) || !std::isfinite(signal_var)) {
    throw std::invalid_argument("KernelParams: signal_var must be positive");
  }
  if (length_scales.size() == 0 || !(length_scales.array() > 0.0).all() ||
      !length_scales.allFinite()) {
    throw std::invalid_argument(
        "KernelParams: length scales must be positive and finite");
  }
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw std::invalid_argument("KernelParams: noise_var must be >= 0");
  }
}

double SquaredExponential(const KernelParams& kernel, const Vector& a,
                          const Vector& b) {
  const double r2 =
      ((a - b).array() / kernel.length_scales.array()).square().sum();
  return kernel.signal_var * std::exp(-0.5 * r2);
}

Eigen::MatrixXd KernelMatrix(const KernelParams& kernel,
                             const std::vector<Vector>& inputs) {
  const int n = static_cast<int>(inputs.size());
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = kernel.signal_var;
    for (int j = 0; j < i; ++j) {
      const double v = SquaredExponential(kernel, inputs[i], inputs[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

GpSurrogate GpSurrogate::Fit(const std::vector<Vector>& inputs,
                             const std::vector<double>& targets,
                             const KernelParams& kernel,
                             std::optional<double> fixed_prior_mean) {
  CheckData(inputs, targets);
  kernel.Validate();
  if (kernel.length_scales.size() != inputs.front().size()) {
    throw std::invalid_argument("GP: kernel dimension does not match inputs");
  }

  GpSurrogate gp;
  MergeDuplicates(inputs, targets, &gp.inputs_, &gp.targets_);
  gp.kernel_ = kernel;
  gp.prior_mean_ = fixed_prior_mean.value_or(Mean(gp.targets_));

  const Eigen::MatrixXd k = KernelMatrix(kernel, gp.inputs_);
  if (!FactorWithJitter(k, kernel.noise_var, &gp.chol_, &gp.jitter_)) {
    std::ostringstream msg;
    msg << "GP: kernel matrix not positive definite even with jitter "
        << kMaxJitter << " (n=" << gp.inputs_.size()
        << ", signal_var=" << kernel.signal_var
        << ", min length scale=" << kernel.length_scales.minCoeff() << ")";
    throw std::runtime_error(msg.str());
  }

  Eigen::VectorXd r(gp.size());
  for (int i = 0; i < gp.size(); ++i) r[i] = gp.targets_[i] - gp.prior_mean_;
  const Eigen::VectorXd y = gp.chol_.triangularView<Eigen::Lower>().solve(r);
  gp.alpha_ = gp.chol_.transpose().triangularView<Eigen::Upper>().solve(y);
  return gp;
}

GpSurrogate::Prediction GpSurrogate::Predict(const Vector& x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("GP: query dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(dim()));
  }
  const int n = size();
  Eigen::VectorXd ks(n);
  for (int i = 0; i < n; ++i) ks[i] = SquaredExponential(kernel_, x, inputs_[i]);
  const double mean = prior_mean_ + ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  const double variance = std::max(0.0, kernel_.signal_var - v.squaredNorm());
  return {mean, variance};
}

double GpSurrogate::LogMarginalLikelihood() const {
  Eigen::VectorXd r(size());
  for (int i = 0; i < size(); ++i) r[i] = targets_[i] - prior_mean_;
  return -0.5 * r.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * size() * std::log(2.0 * std::numbers::pi);
}

double GpSurrogate::best_target() const {
  return *std::min_element(targets_.begin(), targets_.end());
}

double LogMarginalLikelihood(const std::vector<Vector>& inputs,
                             const std::vector<double>& targets,
                             const KernelParams& kernel) {
  try {
    return GpSurrogate::Fit(inputs, targets, kernel).LogMarginalLikelihood();
  } catch (const std::runtime_error&) {
    return -std::numeric_limits<double>::infinity();
  }
}

namespace {

struct LogParams {
  Eigen::VectorXd values;  // [log sf2, log l_1..l_d, (log noise)]
  bool with_noise;

  KernelParams ToKernel(int dim, double fixed_noise) const {
    KernelParams k;
    k.signal_var = std::exp(values[0]);
    k.length_scales = values.segment(1, dim).array().exp().matrix();
    k.noise_var = with_noise ? std::exp(values[dim + 1]) : fixed_noise;
    return k;
  }
};

void ClampLog(Eigen::VectorXd* v, int dim, bool with_noise) {
  (*v)[0] = std::clamp((*v)[0], -30.0, 30.0);
  for (int i = 1; i <= dim; ++i) {
    (*v)[i] = std::clamp((*v)[i], kMinLogLength, kMaxLogLength);
  }
  if (with_noise) (*v)[dim + 1] = std::clamp((*v)[dim + 1], kMinLogNoise, 30.0);
}

}  // namespace

KernelParams OptimizeHyperparams(const std::vector<Vector>& inputs,
                                 const std::vector<double>& targets,
                                 const KernelParams& init,
                                 const HyperSearchOptions& options) {
  CheckData(inputs, targets);
  init.Validate();
  const int dim = static_cast<int>(init.length_scales.size());
  if (dim != inputs.front().size()) {
    throw std::invalid_argument("OptimizeHyperparams: dimension mismatch");
  }

  const bool with_noise = options.optimize_noise;
  const int np = dim + 1 + (with_noise ? 1 : 0);
  Eigen::VectorXd start(np);
  start[0] = std::log(init.signal_var);
  start.segment(1, dim) = init.length_scales.array().log().matrix();
  if (with_noise) {
    start[dim + 1] = std::log(
        std::max(init.noise_var, 1e-6 * init.signal_var));
  }

  auto objective = [&](const Eigen::VectorXd& v) {
    LogParams p{v, with_noise};
    return LogMarginalLikelihood(inputs, targets,
                                 p.ToKernel(dim, init.noise_var));
  };

  KernelParams best = init;
  double best_lml = LogMarginalLikelihood(inputs, targets, init);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    Eigen::VectorXd x = start;
    if (restart > 0) {
      for (int i = 0; i < np; ++i) x[i] += normal(rng);
    }
    ClampLog(&x, dim, with_noise);
    double fx = objective(x);
    int evals = 1;
    double step = options.initial_step;
    while (step >= options.min_step &&
           evals < options.max_evaluations_per_start) {
      bool improved = false;
      for (int i = 0; i < np && evals < options.max_evaluations_per_start;
           ++i) {
        for (double dir : {1.0, -1.0}) {
          Eigen::VectorXd trial = x;
          trial[i] += dir * step;
          ClampLog(&trial, dim, with_noise);
          if (trial[i] == x[i]) continue;
          const double ft = objective(trial);
          ++evals;
          if (ft > fx) {
            x = trial;
            fx = ft;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fx > best_lml) {
      best_lml = fx;
      best = LogParams{x, with_noise}.ToKernel(dim, init.noise_var);
    }
  }
  return best;
}

}  // namespace modelid
