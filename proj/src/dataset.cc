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

#include "modelid/dataset.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "modelid/random.h"

namespace modelid {
namespace {

using Json = nlohmann::ordered_json;

constexpr char kFormat[] = "modelid-trajectories";

Json Row(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector ParseRow(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
}

Json Rows(const std::vector<Vector>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) out.push_back(Row(r));
  return out;
}

std::vector<Vector> ParseRows(const Json& j) {
  std::vector<Vector> out;
  for (const auto& r : j) out.push_back(ParseRow(r));
  return out;
}

}  // namespace

std::string TrajectoryDataset::Serialize() const {
  std::ostringstream out;
  Json header = {{"format", kFormat},     {"version", 1},
                 {"simulator", simulator}, {"param_names", param_names},
                 {"seed", seed},           {"dt", dt},
                 {"horizon", horizon},     {"count", records.size()}};
  out << header.dump() << '\n';
  for (const auto& r : records) {
    Json line = {{"theta", Row(r.theta)},
                 {"states", Rows(r.trajectory.states)},
                 {"controls", Rows(r.trajectory.controls)},
                 {"diverged", r.trajectory.diverged}};
    out << line.dump() << '\n';
  }
  return out.str();
}

TrajectoryDataset TrajectoryDataset::Parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("trajectory dataset: missing header");
  }
  TrajectoryDataset data;
  std::size_t count = 0;
  try {
    const Json header = Json::parse(line);
    if (header.value("format", std::string()) != kFormat ||
        header.value("version", 0) != 1) {
      throw std::invalid_argument("trajectory dataset: unknown format");
    }
    data.simulator = header.at("simulator").get<std::string>();
    data.param_names = header.at("param_names").get<std::vector<std::string>>();
    data.seed = header.at("seed").get<std::uint64_t>();
    data.dt = header.at("dt").get<double>();
    data.horizon = header.at("horizon").get<int>();
    count = header.at("count").get<std::size_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      TrajectoryRecord r;
      r.theta = ParseRow(j.at("theta"));
      r.trajectory.states = ParseRows(j.at("states"));
      r.trajectory.controls = ParseRows(j.at("controls"));
      r.trajectory.diverged = j.at("diverged").get<bool>();
      r.trajectory.Validate();
      if (r.theta.size() != static_cast<Eigen::Index>(data.param_names.size())) {
        throw std::invalid_argument("trajectory dataset: theta size mismatch");
      }
      data.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("trajectory dataset: ") + e.what());
  }
  if (data.records.size() != count) {
    throw std::invalid_argument("trajectory dataset: header count " +
                                std::to_string(count) + " but " +
                                std::to_string(data.records.size()) +
                                " records");
  }
  return data;
}

void TrajectoryDataset::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << Serialize();
  if (!out) throw std::runtime_error("write failed for " + path);
}

TrajectoryDataset TrajectoryDataset::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return Parse(text.str());
}

std::uint64_t TrajectoryDataset::Checksum() const {
  return Fnv1a64(Serialize());
}

std::vector<Trajectory> GenerateTrajectories(
    const BlackBoxSimulator& sim, const std::vector<ParamVector>& thetas,
    const ControlScript& script, int horizon, std::uint64_t seed) {
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  std::vector<Trajectory> out;
  out.reserve(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const std::vector<Vector> controls = script(horizon, MixSeed(seed, i));
    if (static_cast<int>(controls.size()) != horizon) {
      throw std::invalid_argument("control script returned wrong horizon");
    }
    out.push_back(
        Rollout(sim, thetas[i], sim.InitialState(thetas[i]), controls));
  }
  return out;
}

TrajectoryDataset MakeTrajectoryDataset(const BlackBoxSimulator& sim,
                                        const ControlScript& script,
                                        int horizon, int count,
                                        std::uint64_t seed,
                                        double step_seconds) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  TrajectoryDataset data;
  data.simulator = sim.id();
  data.param_names = sim.param_space().names();
  data.seed = seed;
  data.dt = step_seconds;
  data.horizon = horizon;
  const auto thetas = sim.param_space().SampleUniform(MixSeed(seed, 0), count);
  const auto trajectories =
      GenerateTrajectories(sim, thetas, script, horizon, MixSeed(seed, 1));
  for (int i = 0; i < count; ++i) {
    data.records.push_back({thetas[i], trajectories[i]});
  }
  return data;
}

DynamicsDataset TransitionsDataset(const TrajectoryDataset& data,
                                   const ParameterSpace& space,
                                   const Observable& observable,
                                   int per_trajectory, std::uint64_t seed) {
  if (data.records.empty()) throw std::invalid_argument("empty dataset");
  std::vector<std::pair<int, int>> picks;  // (record, step)
  std::mt19937_64 rng(seed);
  for (int r = 0; r < static_cast<int>(data.records.size()); ++r) {
    const int steps = data.records[r].trajectory.horizon();
    std::vector<int> idx(steps);
    std::iota(idx.begin(), idx.end(), 0);
    if (per_trajectory > 0 && per_trajectory < steps) {
      // Partial Fisher-Yates: the first per_trajectory entries are a
      // uniform sample without replacement.
      for (int i = 0; i < per_trajectory; ++i) {
        std::uniform_int_distribution<int> pick(i, steps - 1);
        std::swap(idx[i], idx[pick(rng)]);
      }
      idx.resize(per_trajectory);
      std::sort(idx.begin(), idx.end());
    }
    for (int t : idx) picks.emplace_back(r, t);
  }
  if (picks.empty()) throw std::invalid_argument("dataset has no transitions");

  const auto& first = data.records.front().trajectory;
  const int n = static_cast<int>(picks.size());
  DynamicsDataset out;
  out.theta.resize(space.dim(), n);
  out.state.resize(first.states.front().size(), n);
  out.control.resize(first.controls.front().size(), n);
  out.next.resize(1, n);
  for (int k = 0; k < n; ++k) {
    const auto& rec = data.records[picks[k].first];
    const int t = picks[k].second;
    out.theta.col(k) = space.Normalize(rec.theta);
    out.state.col(k) = rec.trajectory.states[t];
    out.control.col(k) = rec.trajectory.controls[t];
    out.next(0, k) = observable(rec.trajectory.states[t + 1]);
  }
  out.Validate();
  return out;
}

DynamicsDataset PushDynamicsDataset(const std::vector<PushRecord>& records,
                                    const ParameterSpace& space) {
  if (space.dim() != 2) throw std::invalid_argument("push space must be 2-D");
  const int n = static_cast<int>(records.size());
  DynamicsDataset out;
  out.theta.resize(2, n);
  out.state.resize(0, n);
  out.control.resize(1, n);
  out.next.resize(1, n);
  for (int i = 0; i < n; ++i) {
    out.theta.col(i) =
        space.Normalize((Vector(2) << records[i].m, records[i].mu).finished());
    out.control(0, i) = records[i].impulse();
    out.next(0, i) = records[i].displacement;
  }
  out.Validate();
  return out;
}

}  // namespace modelid
