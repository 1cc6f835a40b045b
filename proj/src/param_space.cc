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

#include "modelid/param_space.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

namespace modelid {

ParameterSpace::ParameterSpace(std::vector<std::string> names, Vector lower,
                               Vector upper, int grid_res)
    : names_(std::move(names)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      grid_res_(grid_res) {
  if (names_.empty()) {
    throw std::invalid_argument("ParameterSpace: dimension must be positive");
  }
  if (lower_.size() != dim() || upper_.size() != dim()) {
    throw std::invalid_argument(
        "ParameterSpace: bounds must have one entry per name");
  }
  if (grid_res_ < 2) {
    throw std::invalid_argument("ParameterSpace: grid_res must be >= 2");
  }
  std::set<std::string> seen;
  for (int i = 0; i < dim(); ++i) {
    if (!seen.insert(names_[i]).second) {
      throw std::invalid_argument("ParameterSpace: duplicate name '" +
                                  names_[i] + "'");
    }
    if (!(lower_[i] < upper_[i])) {
      throw std::invalid_argument("ParameterSpace: lower < upper violated for '" +
                                  names_[i] + "'");
    }
  }
}

void ParameterSpace::CheckDim(const Vector& v) const {
  if (v.size() != dim()) {
    throw std::invalid_argument(
        "ParameterSpace: vector has dimension " + std::to_string(v.size()) +
        ", expected " + std::to_string(dim()));
  }
}

Vector ParameterSpace::Normalize(const Vector& theta) const {
  CheckDim(theta);
  return ((theta - lower_).array() / (upper_ - lower_).array()).matrix();
}

Vector ParameterSpace::Denormalize(const Vector& unit) const {
  CheckDim(unit);
  return (lower_.array() + unit.array() * (upper_ - lower_).array()).matrix();
}

bool ParameterSpace::Contains(const Vector& theta) const {
  CheckDim(theta);
  return (theta.array() >= lower_.array()).all() &&
         (theta.array() <= upper_.array()).all();
}

Vector ParameterSpace::Midpoint() const { return 0.5 * (lower_ + upper_); }

int ParameterSpace::IndexOf(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw std::invalid_argument("ParameterSpace: unknown parameter '" + name +
                                "'");
  }
  return static_cast<int>(it - names_.begin());
}

std::vector<ParamVector> ParameterSpace::SampleUniform(std::uint64_t seed,
                                                       int n) const {
  if (n < 1) throw std::invalid_argument("SampleUniform: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ParamVector> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    Vector u(dim());
    for (int i = 0; i < dim(); ++i) u[i] = unit(rng);
    Vector theta = Denormalize(u);
    // guard against rounding past the upper bound
    theta = theta.cwiseMax(lower_).cwiseMin(upper_);
    out.push_back(std::move(theta));
  }
  return out;
}

std::int64_t ParameterSpace::GridSize() const {
  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t size = 1;
  for (int i = 0; i < dim(); ++i) {
    if (size > kMax / grid_res_) return kMax;
    size *= grid_res_;
  }
  return size;
}

std::vector<Vector> ParameterSpace::UnitGrid(std::int64_t cap) const {
  if (dim() > kMaxGridDim) {
    throw std::invalid_argument("UnitGrid: enumeration refused for dimension " +
                                std::to_string(dim()));
  }
  const std::int64_t size = GridSize();
  if (size > cap) {
    throw std::invalid_argument("UnitGrid: " + std::to_string(size) +
                                " points exceeds cap " + std::to_string(cap));
  }
  std::vector<Vector> grid;
  grid.reserve(static_cast<std::size_t>(size));
  const double step = 1.0 / (grid_res_ - 1);
  std::vector<int> idx(dim(), 0);
  for (std::int64_t k = 0; k < size; ++k) {
    Vector p(dim());
    for (int i = 0; i < dim(); ++i) p[i] = idx[i] * step;
    grid.push_back(std::move(p));
    for (int i = dim() - 1; i >= 0; --i) {
      if (++idx[i] < grid_res_) break;
      idx[i] = 0;
    }
  }
  return grid;
}

ParameterSpace ParameterSpace::WithGridRes(int grid_res) const {
  return ParameterSpace(names_, lower_, upper_, grid_res);
}

nlohmann::json ParameterSpace::ToJson() const {
  nlohmann::json params = nlohmann::json::array();
  for (int i = 0; i < dim(); ++i) {
    params.push_back(
        {{"name", names_[i]}, {"lower", lower_[i]}, {"upper", upper_[i]}});
  }
  return {{"grid_res", grid_res_}, {"parameters", params}};
}

ParameterSpace ParameterSpace::FromJson(const nlohmann::json& j) {
  const auto& params = j.at("parameters");
  std::vector<std::string> names;
  Vector lower(params.size()), upper(params.size());
  int i = 0;
  for (const auto& p : params) {
    names.push_back(p.at("name").get<std::string>());
    lower[i] = p.at("lower").get<double>();
    upper[i] = p.at("upper").get<double>();
    ++i;
  }
  return ParameterSpace(std::move(names), lower, upper,
                        j.value("grid_res", 100));
}

ParameterSpace ParameterSpace::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open parameter file " + path);
  return FromJson(nlohmann::json::parse(in));
}

ParameterSpace GroundTruthBox(const ParameterSpace& space,
                              const ParamVector& truth, double frac) {
  if (truth.size() != space.dim()) {
    throw std::invalid_argument("GroundTruthBox: dimension mismatch");
  }
  if (!(frac > 0.0 && frac < 1.0)) {
    throw std::invalid_argument("GroundTruthBox: frac must lie in (0,1)");
  }
  if ((truth.array() <= 0.0).any()) {
    throw std::invalid_argument(
        "GroundTruthBox: truth must be strictly positive");
  }
  // The constructor rejects a collapsed box (lower == upper).
  return ParameterSpace(space.names(), truth * (1.0 - frac),
                        truth * (1.0 + frac), space.grid_res());
}

ParameterSpace UnitCube(int dim, int grid_res) {
  std::vector<std::string> names;
  for (int i = 0; i < dim; ++i) names.push_back("z" + std::to_string(i));
  return ParameterSpace(std::move(names), Vector::Zero(dim), Vector::Ones(dim),
                        grid_res);
}

}  // namespace modelid
