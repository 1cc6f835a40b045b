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

#ifndef MODELID_ACQUISITION_H_
#define MODELID_ACQUISITION_H_

#include <cstdint>
#include <vector>

#include "modelid/gp.h"
#include "modelid/param_space.h"

namespace modelid {

// Grids larger than this are replaced by random candidates.
inline constexpr std::int64_t kMaxCandidateGrid = 100'000;

struct AcquisitionConfig {
  double xi = 0.01;
  int candidate_count = 2048;

  void Validate() const;
};

double NormalPdf(double z);
// Computed as erfc(-z / sqrt(2)) / 2, accurate in both tails.
double NormalCdf(double z);

// Expected improvement for minimization.
double ExpectedImprovement(double mean, double variance, double best,
                           double xi);

// Unit-cube candidates for one acquisition step: the full grid of `space`
// when it has at most kMaxCandidateGrid points (and enumeration is allowed),
// otherwise config.candidate_count uniform draws seeded by `seed`.
std::vector<Vector> MakeCandidates(const ParameterSpace& space,
                                   const AcquisitionConfig& config,
                                   std::uint64_t seed);

// Index of the candidate maximizing EI against the surrogate's best target;
// ties go to the lowest index. The maximal EI value is stored in max_ei when
// non-null.
int ArgmaxEiIndex(const GpSurrogate& gp, const std::vector<Vector>& candidates,
                  const AcquisitionConfig& config, double* max_ei = nullptr);

Vector ArgmaxEi(const GpSurrogate& gp, const std::vector<Vector>& candidates,
                const AcquisitionConfig& config);

}  // namespace modelid

#endif  // MODELID_ACQUISITION_H_
