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

#include "modelid/structure.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "modelid/dataset.h"

namespace modelid {
namespace {

const ParamVector kTruth = DefaultStructureTruth();

Vector ZeroControl() { return Vector::Zero(StructureSimulator::kControlDim); }

TEST(StructureTest, BallisticFreeFall) {
  StructureOptions options;
  options.contact = false;
  options.cables = false;
  const StructureSimulator sim(DefaultStructureSpace(), options);
  Vector s = sim.InitialState(kTruth);
  const double h0 = StructureSimulator::CenterOfMassHeight(s);
  const int steps = static_cast<int>(std::lround(1.0 / (options.dt * options.substeps)));
  for (int k = 0; k < steps; ++k) s = sim.Step(s, ZeroControl(), kTruth);
  const double expected = h0 - 0.5 * options.gravity * 1.0;
  EXPECT_NEAR(StructureSimulator::CenterOfMassHeight(s), expected, 1e-3);
}

TEST(StructureTest, UndampedEnergyDriftBelowOnePercent) {
  StructureOptions options;
  options.contact = false;
  options.dissipation = false;
  options.gravity = 0.0;
  const StructureSimulator sim(DefaultStructureSpace(), options);
  const StructureParams p = StructureParams::FromVector(kTruth);
  Vector s = sim.InitialState(kTruth);
  // Excite the structure with a deterministic velocity perturbation.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (int k = 0; k < 2 * StructureSimulator::kNodes; ++k) {
    s[2 * StructureSimulator::kNodes + k] = normal(rng);
  }
  const double e0 = sim.KineticEnergy(s, p) + sim.PotentialEnergy(s, p);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = sim.Substep(s, ZeroControl(), p);
    const double e = sim.KineticEnergy(s, p) + sim.PotentialEnergy(s, p);
    worst = std::max(worst, std::abs(e - e0) / e0);
  }
  EXPECT_LT(worst, 0.01);
}

TEST(StructureTest, SettlesOnGround) {
  StructureOptions options;
  options.clearance = 0.05;  // released slightly above the ground
  const StructureSimulator sim(DefaultStructureSpace(), options);
  const StructureParams p = StructureParams::FromVector(kTruth);
  Vector s = sim.InitialState(kTruth);
  const double pe0 = sim.PotentialEnergy(s, p);
  const int steps = static_cast<int>(std::lround(5.0 / (options.dt * options.substeps)));
  for (int k = 0; k < steps; ++k) s = sim.Step(s, ZeroControl(), kTruth);
  const double released = pe0 - sim.PotentialEnergy(s, p);
  ASSERT_GT(released, 0.0);
  EXPECT_LT(sim.KineticEnergy(s, p), 1e-6 * released);
}

TEST(StructureTest, StepIsDeterministic) {
  const StructureSimulator sim(DefaultStructureSpace());
  const Vector s = sim.InitialState(kTruth);
  const auto controls = ScriptedControls(3, 0.02, 5);
  Vector a = s, b = s;
  for (const auto& u : controls) {
    a = sim.Step(a, u, kTruth);
    b = sim.Step(b, u, kTruth);
  }
  EXPECT_EQ(a, b);
}

TEST(StructureTest, InertParametersDoNotAffectDynamics) {
  const StructureSimulator sim(DefaultStructureSpace());
  const auto names = StructureParams::Names();
  const Vector s = sim.InitialState(kTruth);
  const Vector u = ScriptedControls(1, 0.02, 2).front();
  const Vector base = sim.Step(s, u, kTruth);
  for (const char* inert : {"rod_spacing", "motor_friction"}) {
    ParamVector theta = kTruth;
    theta[sim.param_space().IndexOf(inert)] *= 1.1;
    EXPECT_EQ(sim.Step(s, u, theta), base) << inert;
  }
  ParamVector heavier = kTruth;
  heavier[sim.param_space().IndexOf("rod_density")] *= 1.1;
  EXPECT_NE(sim.Step(s, u, heavier), base);
}

TEST(StructureTest, BoxIsTenPercentAroundTruth) {
  const ParameterSpace space = DefaultStructureSpace();
  EXPECT_EQ(space.dim(), 12);
  EXPECT_TRUE(space.lower().isApprox(0.9 * kTruth, 1e-14));
  EXPECT_TRUE(space.upper().isApprox(1.1 * kTruth, 1e-14));
}

TEST(StructureTest, RejectsBadDimensions) {
  const StructureSimulator sim(DefaultStructureSpace());
  EXPECT_THROW(sim.Step(Vector::Zero(3), ZeroControl(), kTruth),
               std::invalid_argument);
}

TEST(StructureTest, ZeroHorizonRolloutHasOneState) {
  const StructureSimulator sim(DefaultStructureSpace());
  const auto traj = Rollout(sim, kTruth, sim.InitialState(kTruth), {});
  EXPECT_EQ(traj.states.size(), 1u);
  EXPECT_EQ(traj.horizon(), 0);
}

TEST(ScriptedControlsTest, DeterministicAndBounded) {
  const auto a = ScriptedControls(50, 0.02, 9);
  const auto b = ScriptedControls(50, 0.02, 9);
  ASSERT_EQ(a.size(), 50u);
  for (int k = 0; k < 50; ++k) {
    EXPECT_EQ(a[k], b[k]);
    EXPECT_LE(a[k].cwiseAbs().maxCoeff(), ControlScriptConfig{}.amplitude_hi);
  }
}

}  // namespace
}  // namespace modelid
