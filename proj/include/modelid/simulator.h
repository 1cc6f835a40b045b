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

#ifndef MODELID_SIMULATOR_H_
#define MODELID_SIMULATOR_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "modelid/param_space.h"

namespace modelid {

// Observed sequence x_0, u_0, x_1, ..., u_{T-1}, x_T.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  // Set when the generating rollout diverged and was truncated.
  bool diverged = false;

  int horizon() const { return static_cast<int>(controls.size()); }
  // Throws std::invalid_argument on a malformed layout.
  void Validate() const;
};

// Thrown by simulators when integration produces non-finite state.
class SimulationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic black-box step function f(x, u, theta) -> x'. Parameters are
// in native units. Implementations are stateless and safe to share.
class BlackBoxSimulator {
 public:
  virtual ~BlackBoxSimulator() = default;

  virtual std::string id() const = 0;
  virtual const ParameterSpace& param_space() const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;

  virtual Vector Step(const Vector& state, const Vector& control,
                      const ParamVector& theta) const = 0;
  virtual Vector InitialState(const ParamVector& theta) const = 0;
};

// Open-loop rollout from `initial`. Stops early (diverged = true) when the
// simulator throws SimulationDiverged.
Trajectory Rollout(const BlackBoxSimulator& sim, const ParamVector& theta,
                   const Vector& initial, const std::vector<Vector>& controls);

}  // namespace modelid

#endif  // MODELID_SIMULATOR_H_
