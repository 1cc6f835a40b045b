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

// Planar compliant rod-and-cable structure.
//
// Six nodes sit on a hexagon of circumradius rod_length / 2. Three rods are
// the hexagon's diameters (nodes i and i+3), modeled as stiff axial
// spring-dampers; six actuated cables run around the perimeter (nodes i and
// i+1). Each node carries half a rod plus a spherical payload. The ground is
// a penalty spring-damper with regularized Coulomb friction.
//
// State layout (30): node positions (x0, y0, ..., x5, y5), node velocities
// in the same order, then the six cable rest-length offsets. Controls (6) are
// commanded rest-length rates, clamped to +-target_velocity.
//
// rod_spacing and motor_friction are accepted but have no effect on the
// dynamics.

#ifndef MODELID_STRUCTURE_H_
#define MODELID_STRUCTURE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "modelid/simulator.h"

namespace modelid {

struct StructureParams {
  double rod_density = 1500.0;     // kg/m^3
  double rod_radius = 0.02;        // m
  double payload_density = 800.0;  // kg/m^3
  double payload_radius = 0.05;    // m
  double cable_stiffness = 1000.0; // N/m
  double cable_damping = 10.0;     // N s/m
  double rod_length = 1.0;         // m
  double rod_spacing = 0.1;        // m, inert
  double pretension = 50.0;        // N
  double max_tension = 200.0;      // N
  double target_velocity = 0.2;    // m/s
  double motor_friction = 0.1;     // inert

  static const std::vector<std::string>& Names();
  static StructureParams FromVector(const ParamVector& v);
  ParamVector ToVector() const;
  // All positive and pretension < max_tension.
  void Validate() const;

  double RodMass() const;
  double PayloadMass() const;
  double NodeMass() const;
};

struct StructureOptions {
  double dt = 1e-3;
  // Integration substeps per control step.
  int substeps = 20;
  double gravity = 9.81;
  bool contact = true;
  bool cables = true;
  // Disables cable, rod and contact damping as well as friction.
  bool dissipation = true;
  double contact_stiffness = 1e4;
  double contact_damping = 200.0;
  double ground_friction = 0.5;
  double friction_velocity = 0.01;
  double rod_stiffness = 5e4;
  double rod_damping = 50.0;
  // Height of the lowest nodes above ground in InitialState.
  double clearance = 0.0;
};

class StructureSimulator : public BlackBoxSimulator {
 public:
  static constexpr int kNodes = 6;
  static constexpr int kRods = 3;
  static constexpr int kCables = 6;
  static constexpr int kStateDim = 4 * kNodes + kCables;
  static constexpr int kControlDim = kCables;

  static constexpr std::array<std::array<int, 2>, kRods> kRodNodes = {
      {{0, 3}, {1, 4}, {2, 5}}};
  static constexpr std::array<std::array<int, 2>, kCables> kCableNodes = {
      {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}}};

  explicit StructureSimulator(ParameterSpace space,
                              StructureOptions options = {});

  std::string id() const override { return "structure"; }
  const ParameterSpace& param_space() const override { return space_; }
  int state_dim() const override { return kStateDim; }
  int control_dim() const override { return kControlDim; }
  const StructureOptions& options() const { return options_; }

  // One control step = options().substeps integration steps of dt.
  Vector Step(const Vector& state, const Vector& control,
              const ParamVector& theta) const override;
  Vector InitialState(const ParamVector& theta) const override;

  // A single dt integration step (drift-kick-drift leapfrog).
  Vector Substep(const Vector& state, const Vector& control,
                 const StructureParams& p) const;

  // Cable tensions at a state (>= 0, <= max_tension).
  std::array<double, kCables> CableTensions(const Vector& state,
                                            const Vector& control,
                                            const StructureParams& p) const;

  double KineticEnergy(const Vector& state, const StructureParams& p) const;
  // Gravity + elastic (rods, cables, ground penalty) potential energy,
  // excluding dissipative terms.
  double PotentialEnergy(const Vector& state, const StructureParams& p) const;
  static double CenterOfMassHeight(const Vector& state);

 private:
  void Accelerations(const Vector& pos_vel, const Vector& control,
                     const StructureParams& p, double* acc) const;

  ParameterSpace space_;
  StructureOptions options_;
};

// Nominal (ground-truth) parameters and the +-10% box around them.
ParamVector DefaultStructureTruth();
ParameterSpace DefaultStructureSpace(int grid_res = 100);

struct ControlScriptConfig {
  // Sinusoidal rest-length rate commands; amplitudes above target_velocity
  // saturate the rate limit.
  double amplitude_lo = 0.05;
  double amplitude_hi = 0.4;
  double frequency_lo = 0.5;  // Hz
  double frequency_hi = 1.5;
};

// Open-loop control sequence of `horizon` steps with per-cable sinusoids,
// deterministic per seed. `step_seconds` is the duration of one control step.
std::vector<Vector> ScriptedControls(int horizon, double step_seconds,
                                     std::uint64_t seed,
                                     const ControlScriptConfig& config = {});

}  // namespace modelid

#endif  // MODELID_STRUCTURE_H_
