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

#include "modelid/push.h"

#include <fstream>
#include <random>
#include <stdexcept>
#include <utility>

#include "modelid/csv.h"
#include "modelid/random.h"

namespace modelid {

double PushDisplacement(const PushParams& p, double impulse) {
  if (!(p.m > 0.0) || !(p.mu > 0.0)) {
    throw std::invalid_argument("PushDisplacement: m and mu must be positive");
  }
  if (!(impulse >= 0.0)) {
    throw std::invalid_argument("PushDisplacement: impulse must be >= 0");
  }
  return (impulse * impulse) / (2.0 * (p.m * p.m * p.mu));
}

ParameterSpace DefaultPushSpace(int grid_res) {
  return ParameterSpace({"m", "mu"}, (Vector(2) << 0.5, 0.2).finished(),
                        (Vector(2) << 1.5, 0.6).finished(), grid_res);
}

PushSimulator::PushSimulator(ParameterSpace space) : space_(std::move(space)) {
  if (space_.dim() != 2) {
    throw std::invalid_argument("PushSimulator: parameter space must be (m, mu)");
  }
}

Vector PushSimulator::Step(const Vector& state, const Vector& control,
                           const ParamVector& theta) const {
  if (state.size() != 1 || control.size() != 1 || theta.size() != 2) {
    throw std::invalid_argument("PushSimulator::Step: bad dimensions");
  }
  Vector next(1);
  next[0] = state[0] + PushDisplacement({theta[0], theta[1]}, control[0]);
  return next;
}

Vector PushSimulator::InitialState(const ParamVector&) const {
  return Vector::Zero(1);
}

namespace {

std::vector<PushRecord> Draw(int n, std::uint64_t seed, const PushSampling& s) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  std::vector<PushRecord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    PushRecord r;
    r.m = in(s.m_lo, s.m_hi);
    r.mu = in(s.mu_lo, s.mu_hi);
    r.force = in(s.force_lo, s.force_hi);
    r.duration = in(s.duration_lo, s.duration_hi);
    r.displacement = PushDisplacement({r.m, r.mu}, r.impulse());
    out.push_back(r);
  }
  return out;
}

}  // namespace

PushDatasets MakePushDataset(int n_train, int n_test, std::uint64_t seed,
                             const PushSampling& sampling) {
  if (n_train < 1 || n_test < 1) {
    throw std::invalid_argument("MakePushDataset: sizes must be >= 1");
  }
  return {Draw(n_train, MixSeed(seed, 0), sampling),
          Draw(n_test, MixSeed(seed, 1), sampling)};
}

void WritePushCsv(const std::string& path,
                  const std::vector<PushRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "m,mu,force,duration,impulse,displacement\n";
  for (const auto& r : records) {
    out << FormatDouble(r.m) << ',' << FormatDouble(r.mu) << ','
        << FormatDouble(r.force) << ',' << FormatDouble(r.duration) << ','
        << FormatDouble(r.impulse()) << ',' << FormatDouble(r.displacement)
        << '\n';
  }
}

std::vector<PushRecord> ReadPushCsv(const std::string& path) {
  const CsvTable t = ReadCsv(path);
  const int cm = t.Column("m"), cmu = t.Column("mu"), cf = t.Column("force"),
            cd = t.Column("duration"), cs = t.Column("displacement");
  std::vector<PushRecord> out;
  for (const auto& row : t.rows) {
    PushRecord r;
    r.m = ParseDouble(row.at(cm));
    r.mu = ParseDouble(row.at(cmu));
    r.force = ParseDouble(row.at(cf));
    r.duration = ParseDouble(row.at(cd));
    r.displacement = ParseDouble(row.at(cs));
    out.push_back(r);
  }
  return out;
}

std::vector<Trajectory> PushTrajectories(const PushSimulator& sim,
                                         const ParamVector& theta, int count,
                                         std::uint64_t seed,
                                         const PushSampling& sampling) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Trajectory> out;
  for (int i = 0; i < count; ++i) {
    const double f =
        sampling.force_lo + (sampling.force_hi - sampling.force_lo) * u(rng);
    const double t = sampling.duration_lo +
                     (sampling.duration_hi - sampling.duration_lo) * u(rng);
    Vector impulse(1);
    impulse[0] = f * t;
    out.push_back(Rollout(sim, theta, sim.InitialState(theta), {impulse}));
  }
  return out;
}

}  // namespace modelid
