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

#include "modelid/simulator.h"

namespace modelid {

void Trajectory::Validate() const {
  if (states.size() != controls.size() + 1) {
    throw std::invalid_argument(
        "Trajectory: expected one more state than controls");
  }
  const auto sd = states.front().size();
  for (const auto& s : states) {
    if (s.size() != sd) {
      throw std::invalid_argument("Trajectory: inconsistent state dimension");
    }
  }
  if (!controls.empty()) {
    const auto cd = controls.front().size();
    for (const auto& c : controls) {
      if (c.size() != cd) {
        throw std::invalid_argument(
            "Trajectory: inconsistent control dimension");
      }
    }
  }
}

Trajectory Rollout(const BlackBoxSimulator& sim, const ParamVector& theta,
                   const Vector& initial, const std::vector<Vector>& controls) {
  Trajectory traj;
  traj.states.push_back(initial);
  for (const auto& u : controls) {
    try {
      traj.states.push_back(sim.Step(traj.states.back(), u, theta));
    } catch (const SimulationDiverged&) {
      traj.diverged = true;
      break;
    }
    traj.controls.push_back(u);
  }
  return traj;
}

}  // namespace modelid
