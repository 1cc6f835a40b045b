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

// 1-D point pushing: an impulse F*t applied to a mass m resting on a surface
// with kinetic friction mu slides it a distance S = (F t)^2 / (2 m^2 mu).
// Gravity is folded into mu.

#ifndef MODELID_PUSH_H_
#define MODELID_PUSH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "modelid/simulator.h"

namespace modelid {

struct PushParams {
  double m = 1.0;
  double mu = 0.32;
};

// Throws std::invalid_argument for m <= 0, mu <= 0 or impulse < 0.
double PushDisplacement(const PushParams& p, double impulse);

// Parameters (m, mu) over [0.5, 1.5] x [0.2, 0.6].
ParameterSpace DefaultPushSpace(int grid_res = 100);

// State: position (1). Control: impulse F*t (1). Each step slides the point
// from its current position by PushDisplacement.
class PushSimulator : public BlackBoxSimulator {
 public:
  explicit PushSimulator(ParameterSpace space = DefaultPushSpace());

  std::string id() const override { return "push"; }
  const ParameterSpace& param_space() const override { return space_; }
  int state_dim() const override { return 1; }
  int control_dim() const override { return 1; }
  Vector Step(const Vector& state, const Vector& control,
              const ParamVector& theta) const override;
  Vector InitialState(const ParamVector& theta) const override;

 private:
  ParameterSpace space_;
};

struct PushSampling {
  double m_lo = 0.5, m_hi = 1.5;
  double mu_lo = 0.2, mu_hi = 0.6;
  double force_lo = 0.0, force_hi = 2.0;
  double duration_lo = 0.0, duration_hi = 1.0;
};

struct PushRecord {
  double m = 0.0;
  double mu = 0.0;
  double force = 0.0;
  double duration = 0.0;
  double displacement = 0.0;

  double impulse() const { return force * duration; }
};

struct PushDatasets {
  std::vector<PushRecord> train;
  std::vector<PushRecord> test;
};

// Uniform draws of (m, mu, F, t) with S from PushDisplacement. Train and test
// use independent streams derived from `seed`.
PushDatasets MakePushDataset(int n_train, int n_test, std::uint64_t seed,
                             const PushSampling& sampling = {});

// CSV with header m,mu,force,duration,impulse,displacement.
void WritePushCsv(const std::string& path,
                  const std::vector<PushRecord>& records);
std::vector<PushRecord> ReadPushCsv(const std::string& path);

// Single-push trajectories from the origin with impulses drawn from the
// sampling ranges.
std::vector<Trajectory> PushTrajectories(const PushSimulator& sim,
                                         const ParamVector& theta, int count,
                                         std::uint64_t seed,
                                         const PushSampling& sampling = {});

}  // namespace modelid

#endif  // MODELID_PUSH_H_
