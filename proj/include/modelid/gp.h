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

#ifndef MODELID_GP_H_
#define MODELID_GP_H_

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "modelid/param_space.h"

namespace modelid {

// Squared-exponential ARD kernel hyperparameters.
struct KernelParams {
  double signal_var = 1.0;
  Vector length_scales;
  double noise_var = 0.0;

  static KernelParams Isotropic(int dim, double length_scale,
                                double signal_var = 1.0,
                                double noise_var = 0.0);
  void Validate() const;
};

double SquaredExponential(const KernelParams& kernel, const Vector& a,
                          const Vector& b);

// Noise-free kernel matrix over a set of inputs.
Eigen::MatrixXd KernelMatrix(const KernelParams& kernel,
                             const std::vector<Vector>& inputs);

inline constexpr double kInitialJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-4;

// Exact GP posterior over a scalar function. The prior mean is the mean of
// the observed targets. Fitted surrogates are immutable; Predict is const
// and safe to call concurrently.
class GpSurrogate {
 public:
  struct Prediction {
    double mean;
    double variance;
  };

  // Inputs closer than 1e-10 are merged (targets averaged). Cholesky of
  // K + noise_var I + jitter I is retried with jitter escalated from 1e-10
  // by factors of 10 up to 1e-4; failure past that throws.
  // `fixed_prior_mean` overrides the observed-mean prior.
  static GpSurrogate Fit(const std::vector<Vector>& inputs,
                         const std::vector<double>& targets,
                         const KernelParams& kernel,
                         std::optional<double> fixed_prior_mean = std::nullopt);

  Prediction Predict(const Vector& x) const;

  double LogMarginalLikelihood() const;

  int size() const { return static_cast<int>(inputs_.size()); }
  int dim() const { return static_cast<int>(inputs_.front().size()); }
  const std::vector<Vector>& inputs() const { return inputs_; }
  const std::vector<double>& targets() const { return targets_; }
  const KernelParams& kernel() const { return kernel_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  double jitter() const { return jitter_; }
  double prior_mean() const { return prior_mean_; }
  double best_target() const;

 private:
  GpSurrogate() = default;

  std::vector<Vector> inputs_;
  std::vector<double> targets_;
  KernelParams kernel_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double prior_mean_ = 0.0;
};

// Log marginal likelihood of the data under the kernel; -inf when the
// kernel matrix cannot be factorized.
double LogMarginalLikelihood(const std::vector<Vector>& inputs,
                             const std::vector<double>& targets,
                             const KernelParams& kernel);

struct HyperSearchOptions {
  int restarts = 3;
  int max_evaluations_per_start = 300;
  double initial_step = 1.0;  // in log space
  double min_step = 1e-3;
  bool optimize_noise = false;
  std::uint64_t seed = 0;
};

// Multi-start coordinate search over log-hyperparameters maximizing the log
// marginal likelihood. The result never has lower likelihood than `init`.
KernelParams OptimizeHyperparams(const std::vector<Vector>& inputs,
                                 const std::vector<double>& targets,
                                 const KernelParams& init,
                                 const HyperSearchOptions& options = {});

}  // namespace modelid

#endif  // MODELID_GP_H_
