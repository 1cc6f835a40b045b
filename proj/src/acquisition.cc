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

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace modelid {

void AcquisitionConfig::Validate() const {
  if (!(xi >= 0.0)) throw std::invalid_argument("AcquisitionConfig: xi < 0");
  if (candidate_count < 1) {
    throw std::invalid_argument("AcquisitionConfig: candidate_count < 1");
  }
}

double NormalPdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double NormalCdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double ExpectedImprovement(double mean, double variance, double best,
                           double xi) {
  const double improvement = best - mean - xi;
  if (!(variance > 0.0)) return std::max(0.0, improvement);
  const double sigma = std::sqrt(variance);
  const double z = improvement / sigma;
  const double ei = improvement * NormalCdf(z) + sigma * NormalPdf(z);
  return std::max(0.0, ei);
}

std::vector<Vector> MakeCandidates(const ParameterSpace& space,
                                   const AcquisitionConfig& config,
                                   std::uint64_t seed) {
  config.Validate();
  if (space.dim() <= kMaxGridDim && space.GridSize() <= kMaxCandidateGrid) {
    return space.UnitGrid(kMaxCandidateGrid);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(config.candidate_count);
  for (int k = 0; k < config.candidate_count; ++k) {
    Vector c(space.dim());
    for (int i = 0; i < space.dim(); ++i) c[i] = unit(rng);
    out.push_back(std::move(c));
  }
  return out;
}

int ArgmaxEiIndex(const GpSurrogate& gp, const std::vector<Vector>& candidates,
                  const AcquisitionConfig& config, double* max_ei) {
  if (candidates.empty()) {
    throw std::invalid_argument("ArgmaxEi: empty candidate set");
  }
  const double best = gp.best_target();
  int best_index = 0;
  double best_ei = -1.0;
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    const auto p = gp.Predict(candidates[i]);
    const double ei = ExpectedImprovement(p.mean, p.variance, best, config.xi);
    if (ei > best_ei) {
      best_ei = ei;
      best_index = i;
    }
  }
  if (max_ei != nullptr) *max_ei = best_ei;
  return best_index;
}

Vector ArgmaxEi(const GpSurrogate& gp, const std::vector<Vector>& candidates,
                const AcquisitionConfig& config) {
  return candidates[ArgmaxEiIndex(gp, candidates, config)];
}

}  // namespace modelid
