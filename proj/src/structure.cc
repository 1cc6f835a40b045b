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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>

namespace modelid {
namespace {

constexpr int kN = StructureSimulator::kNodes;
constexpr int kPos = 0;
constexpr int kVel = 2 * kN;
constexpr int kRest = 4 * kN;
// Cables never shorten below this fraction of their geometric length.
constexpr double kMinRestFraction = 0.2;
constexpr double kDivergenceBound = 1e4;

struct Geometry {
  double rod_rest;     // rod spring rest length (prestressed)
  double cable_base;   // cable rest length at zero offset
  double cable_floor;  // smallest allowed rest length
};

Geometry MakeGeometry(const StructureParams& p, const StructureOptions& o) {
  Geometry g;
  const double side = 0.5 * p.rod_length;
  g.cable_base = side - p.pretension / p.cable_stiffness;
  g.cable_floor = kMinRestFraction * side;
  // In the regular hexagon the two cables at a node pull inward with a
  // resultant equal to the pretension; rods are preloaded to balance it.
  g.rod_rest = p.rod_length + (o.cables ? p.pretension / o.rod_stiffness : 0.0);
  return g;
}

double RateLimited(double u, const StructureParams& p) {
  return std::clamp(u, -p.target_velocity, p.target_velocity);
}

// Elastic energy of a tension-only spring whose force saturates at cap.
double CableEnergy(double ext, double k, double cap) {
  if (ext <= 0.0) return 0.0;
  const double knee = cap / k;
  if (ext <= knee) return 0.5 * k * ext * ext;
  return 0.5 * cap * knee + cap * (ext - knee);
}

}  // namespace

const std::vector<std::string>& StructureParams::Names() {
  static const std::vector<std::string> names = {
      "rod_density",     "rod_radius",    "payload_density", "payload_radius",
      "cable_stiffness", "cable_damping", "rod_length",      "rod_spacing",
      "pretension",      "max_tension",   "target_velocity", "motor_friction"};
  return names;
}

StructureParams StructureParams::FromVector(const ParamVector& v) {
  if (v.size() != 12) {
    throw std::invalid_argument("StructureParams: expected 12 values");
  }
  StructureParams p;
  p.rod_density = v[0];
  p.rod_radius = v[1];
  p.payload_density = v[2];
  p.payload_radius = v[3];
  p.cable_stiffness = v[4];
  p.cable_damping = v[5];
  p.rod_length = v[6];
  p.rod_spacing = v[7];
  p.pretension = v[8];
  p.max_tension = v[9];
  p.target_velocity = v[10];
  p.motor_friction = v[11];
  return p;
}

ParamVector StructureParams::ToVector() const {
  ParamVector v(12);
  v << rod_density, rod_radius, payload_density, payload_radius,
      cable_stiffness, cable_damping, rod_length, rod_spacing, pretension,
      max_tension, target_velocity, motor_friction;
  return v;
}

void StructureParams::Validate() const {
  if (!(ToVector().array() > 0.0).all()) {
    throw std::invalid_argument("StructureParams: all values must be positive");
  }
  if (!(pretension < max_tension)) {
    throw std::invalid_argument(
        "StructureParams: pretension must be below max_tension");
  }
}

double StructureParams::RodMass() const {
  return rod_density * std::numbers::pi * rod_radius * rod_radius * rod_length;
}

double StructureParams::PayloadMass() const {
  return payload_density * (4.0 / 3.0) * std::numbers::pi * payload_radius *
         payload_radius * payload_radius;
}

double StructureParams::NodeMass() const {
  return 0.5 * RodMass() + PayloadMass();
}

StructureSimulator::StructureSimulator(ParameterSpace space,
                                       StructureOptions options)
    : space_(std::move(space)), options_(options) {
  if (space_.dim() != 12) {
    throw std::invalid_argument("StructureSimulator: expected 12 parameters");
  }
  if (!(options_.dt > 0.0) || options_.substeps < 1) {
    throw std::invalid_argument("StructureSimulator: bad time step settings");
  }
}

void StructureSimulator::Accelerations(const Vector& s, const Vector& control,
                                       const StructureParams& p,
                                       double* acc) const {
  const double mass = p.NodeMass();
  const Geometry geo = MakeGeometry(p, options_);
  const bool damp = options_.dissipation;
  std::array<double, 2 * kN> f{};

  for (int i = 0; i < kN; ++i) f[2 * i + 1] -= mass * options_.gravity;

  auto axial = [&](int a, int b, double* len, double* rate, double n[2]) {
    const double dx = s[kPos + 2 * b] - s[kPos + 2 * a];
    const double dy = s[kPos + 2 * b + 1] - s[kPos + 2 * a + 1];
    *len = std::hypot(dx, dy);
    n[0] = dx / *len;
    n[1] = dy / *len;
    *rate = (s[kVel + 2 * b] - s[kVel + 2 * a]) * n[0] +
            (s[kVel + 2 * b + 1] - s[kVel + 2 * a + 1]) * n[1];
  };
  // Positive force pulls the two nodes together.
  auto apply = [&](int a, int b, double force, const double n[2]) {
    f[2 * a] += force * n[0];
    f[2 * a + 1] += force * n[1];
    f[2 * b] -= force * n[0];
    f[2 * b + 1] -= force * n[1];
  };

  for (const auto& rod : kRodNodes) {
    double len, rate, n[2];
    axial(rod[0], rod[1], &len, &rate, n);
    double force = options_.rod_stiffness * (len - geo.rod_rest);
    if (damp) force += options_.rod_damping * rate;
    apply(rod[0], rod[1], force, n);
  }

  if (options_.cables) {
    for (int c = 0; c < kCables; ++c) {
      double len, rate, n[2];
      axial(kCableNodes[c][0], kCableNodes[c][1], &len, &rate, n);
      const double rest = std::max(geo.cable_base + s[kRest + c], geo.cable_floor);
      const double ext = len - rest;
      if (ext <= 0.0) continue;
      double tension = p.cable_stiffness * ext;
      if (damp) {
        tension += p.cable_damping * (rate - RateLimited(control[c], p));
      }
      tension = std::clamp(tension, 0.0, p.max_tension);
      apply(kCableNodes[c][0], kCableNodes[c][1], tension, n);
    }
  }

  if (options_.contact) {
    for (int i = 0; i < kN; ++i) {
      const double y = s[kPos + 2 * i + 1];
      if (y >= 0.0) continue;
      const double vy = s[kVel + 2 * i + 1];
      double normal = -options_.contact_stiffness * y;
      if (damp) normal -= options_.contact_damping * vy;
      normal = std::max(normal, 0.0);
      f[2 * i + 1] += normal;
      if (damp) {
        const double vx = s[kVel + 2 * i];
        const double slip =
            std::clamp(vx / options_.friction_velocity, -1.0, 1.0);
        f[2 * i] -= options_.ground_friction * normal * slip;
      }
    }
  }

  for (int k = 0; k < 2 * kN; ++k) acc[k] = f[k] / mass;
}

Vector StructureSimulator::Substep(const Vector& state, const Vector& control,
                                   const StructureParams& p) const {
  const double dt = options_.dt;
  Vector mid = state;
  // drift half step
  for (int k = 0; k < 2 * kN; ++k) mid[kPos + k] += 0.5 * dt * state[kVel + k];
  for (int c = 0; c < kCables; ++c) {
    mid[kRest + c] += 0.5 * dt * RateLimited(control[c], p);
  }
  // kick
  double acc[2 * kN];
  Accelerations(mid, control, p, acc);
  Vector next = mid;
  for (int k = 0; k < 2 * kN; ++k) next[kVel + k] += dt * acc[k];
  // drift half step
  for (int k = 0; k < 2 * kN; ++k) next[kPos + k] += 0.5 * dt * next[kVel + k];
  for (int c = 0; c < kCables; ++c) {
    next[kRest + c] += 0.5 * dt * RateLimited(control[c], p);
  }
  return next;
}

Vector StructureSimulator::Step(const Vector& state, const Vector& control,
                                const ParamVector& theta) const {
  if (state.size() != kStateDim || control.size() != kControlDim) {
    throw std::invalid_argument("StructureSimulator::Step: bad dimensions");
  }
  const StructureParams p = StructureParams::FromVector(theta);
  Vector s = state;
  for (int k = 0; k < options_.substeps; ++k) {
    s = Substep(s, control, p);
  }
  if (!s.allFinite() || s.cwiseAbs().maxCoeff() > kDivergenceBound) {
    throw SimulationDiverged("structure simulation diverged");
  }
  return s;
}

Vector StructureSimulator::InitialState(const ParamVector& theta) const {
  const StructureParams p = StructureParams::FromVector(theta);
  const double radius = 0.5 * p.rod_length;
  // Nodes 4 and 5 form the bottom edge.
  const double lift = radius * std::sin(std::numbers::pi / 3.0) +
                      options_.clearance;
  Vector s = Vector::Zero(kStateDim);
  for (int i = 0; i < kN; ++i) {
    const double angle = i * std::numbers::pi / 3.0;
    s[kPos + 2 * i] = radius * std::cos(angle);
    s[kPos + 2 * i + 1] = radius * std::sin(angle) + lift;
  }
  return s;
}

std::array<double, StructureSimulator::kCables>
StructureSimulator::CableTensions(const Vector& s, const Vector& control,
                                  const StructureParams& p) const {
  const Geometry geo = MakeGeometry(p, options_);
  std::array<double, kCables> out{};
  for (int c = 0; c < kCables; ++c) {
    const int a = kCableNodes[c][0], b = kCableNodes[c][1];
    const double dx = s[kPos + 2 * b] - s[kPos + 2 * a];
    const double dy = s[kPos + 2 * b + 1] - s[kPos + 2 * a + 1];
    const double len = std::hypot(dx, dy);
    const double rate = ((s[kVel + 2 * b] - s[kVel + 2 * a]) * dx +
                         (s[kVel + 2 * b + 1] - s[kVel + 2 * a + 1]) * dy) /
                        len;
    const double rest = std::max(geo.cable_base + s[kRest + c], geo.cable_floor);
    const double ext = len - rest;
    if (ext <= 0.0) continue;
    double tension = p.cable_stiffness * ext;
    if (options_.dissipation) {
      tension += p.cable_damping * (rate - RateLimited(control[c], p));
    }
    out[c] = std::clamp(tension, 0.0, p.max_tension);
  }
  return out;
}

double StructureSimulator::KineticEnergy(const Vector& s,
                                         const StructureParams& p) const {
  return 0.5 * p.NodeMass() * s.segment(kVel, 2 * kN).squaredNorm();
}

double StructureSimulator::PotentialEnergy(const Vector& s,
                                           const StructureParams& p) const {
  const double mass = p.NodeMass();
  const Geometry geo = MakeGeometry(p, options_);
  double e = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double y = s[kPos + 2 * i + 1];
    e += mass * options_.gravity * y;
    if (options_.contact && y < 0.0) {
      e += 0.5 * options_.contact_stiffness * y * y;
    }
  }
  auto length = [&](int a, int b) {
    return std::hypot(s[kPos + 2 * b] - s[kPos + 2 * a],
                      s[kPos + 2 * b + 1] - s[kPos + 2 * a + 1]);
  };
  for (const auto& rod : kRodNodes) {
    const double d = length(rod[0], rod[1]) - geo.rod_rest;
    e += 0.5 * options_.rod_stiffness * d * d;
  }
  if (options_.cables) {
    for (int c = 0; c < kCables; ++c) {
      const double rest =
          std::max(geo.cable_base + s[kRest + c], geo.cable_floor);
      e += CableEnergy(length(kCableNodes[c][0], kCableNodes[c][1]) - rest,
                       p.cable_stiffness, p.max_tension);
    }
  }
  return e;
}

double StructureSimulator::CenterOfMassHeight(const Vector& s) {
  double h = 0.0;
  for (int i = 0; i < kN; ++i) h += s[kPos + 2 * i + 1];
  return h / kN;
}

ParamVector DefaultStructureTruth() { return StructureParams{}.ToVector(); }

ParameterSpace DefaultStructureSpace(int grid_res) {
  const ParameterSpace nominal(StructureParams::Names(),
                               0.5 * DefaultStructureTruth(),
                               2.0 * DefaultStructureTruth(), grid_res);
  return GroundTruthBox(nominal, DefaultStructureTruth(), 0.1);
}

std::vector<Vector> ScriptedControls(int horizon, double step_seconds,
                                     std::uint64_t seed,
                                     const ControlScriptConfig& config) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, StructureSimulator::kControlDim> amp, freq, phase;
  for (int c = 0; c < StructureSimulator::kControlDim; ++c) {
    amp[c] = config.amplitude_lo +
             (config.amplitude_hi - config.amplitude_lo) * u(rng);
    freq[c] = config.frequency_lo +
              (config.frequency_hi - config.frequency_lo) * u(rng);
    phase[c] = 2.0 * std::numbers::pi * u(rng);
  }
  std::vector<Vector> controls;
  controls.reserve(horizon);
  for (int k = 0; k < horizon; ++k) {
    const double t = k * step_seconds;
    Vector c(StructureSimulator::kControlDim);
    for (int j = 0; j < c.size(); ++j) {
      c[j] = amp[j] * std::sin(2.0 * std::numbers::pi * freq[j] * t + phase[j]);
    }
    controls.push_back(std::move(c));
  }
  return controls;
}

}  // namespace modelid
