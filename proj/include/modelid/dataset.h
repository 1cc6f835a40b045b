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

// Trajectory datasets: seeded generation and a line-delimited JSON file
// format.
//
//   line 1:  {"format": "modelid-trajectories", "version": 1,
//             "simulator": id, "param_names": [...], "seed": s, "dt": dt,
//             "horizon": T, "count": N}
//   line k:  {"theta": [...], "states": [[...], ...],
//             "controls": [[...], ...], "diverged": bool}
//
// Doubles are written in shortest round-trip form, so a write/read cycle is
// bit-exact.

#ifndef MODELID_DATASET_H_
#define MODELID_DATASET_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "modelid/latent.h"
#include "modelid/push.h"
#include "modelid/simulator.h"

namespace modelid {

struct TrajectoryRecord {
  ParamVector theta;
  Trajectory trajectory;
};

struct TrajectoryDataset {
  std::string simulator;
  std::vector<std::string> param_names;
  std::uint64_t seed = 0;
  double dt = 0.0;  // seconds per control step
  int horizon = 0;
  std::vector<TrajectoryRecord> records;

  // Serialized text; identical datasets give identical text.
  std::string Serialize() const;
  static TrajectoryDataset Parse(const std::string& text);
  void Save(const std::string& path) const;
  static TrajectoryDataset Load(const std::string& path);
  // FNV-1a of Serialize().
  std::uint64_t Checksum() const;
};

// Open-loop control sequence of a given horizon for one trajectory.
using ControlScript =
    std::function<std::vector<Vector>(int horizon, std::uint64_t seed)>;

// One rollout per theta from sim.InitialState(theta); trajectory i uses
// controls script(horizon, MixSeed(seed, i)). Diverged rollouts are
// truncated and flagged.
std::vector<Trajectory> GenerateTrajectories(
    const BlackBoxSimulator& sim, const std::vector<ParamVector>& thetas,
    const ControlScript& script, int horizon, std::uint64_t seed);

// `count` trajectories with parameters drawn uniformly from the simulator's
// parameter space (stream MixSeed(seed, 0)) and controls from `script`
// (streams derived from MixSeed(seed, 1)).
TrajectoryDataset MakeTrajectoryDataset(const BlackBoxSimulator& sim,
                                        const ControlScript& script,
                                        int horizon, int count,
                                        std::uint64_t seed,
                                        double step_seconds);

// Reduced next-state observable used as dynamics-network target.
using Observable = std::function<double(const Vector& state)>;

// Transition samples (unit theta, x_t, u_t, observable(x_{t+1})). At most
// `per_trajectory` transitions are taken per trajectory (all when <= 0),
// chosen by a seeded shuffle.
DynamicsDataset TransitionsDataset(const TrajectoryDataset& data,
                                   const ParameterSpace& space,
                                   const Observable& observable,
                                   int per_trajectory, std::uint64_t seed);

// Pushing records as dynamics samples: theta = normalized (m, mu), no state,
// control = impulse F t, target = displacement S.
DynamicsDataset PushDynamicsDataset(const std::vector<PushRecord>& records,
                                    const ParameterSpace& space);

}  // namespace modelid

#endif  // MODELID_DATASET_H_
