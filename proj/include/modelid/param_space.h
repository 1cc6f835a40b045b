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

#ifndef MODELID_PARAM_SPACE_H_
#define MODELID_PARAM_SPACE_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace modelid {

using Vector = Eigen::VectorXd;

// Parameter vectors are plain vectors in native units; unit-cube vectors are
// the normalized counterpart used by every surrogate and network.
using ParamVector = Vector;

// Grid enumeration refuses anything larger than this many points.
inline constexpr std::int64_t kMaxGridPoints = 1'000'000;
// Enumeration is only allowed for low-dimensional spaces.
inline constexpr int kMaxGridDim = 3;

// Box-bounded domain of physical parameters with a regular grid resolution.
// Immutable after construction.
class ParameterSpace {
 public:
  ParameterSpace(std::vector<std::string> names, Vector lower, Vector upper,
                 int grid_res = 100);

  int dim() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  int grid_res() const { return grid_res_; }

  // Affine map lower -> 0, upper -> 1, and its inverse.
  Vector Normalize(const Vector& theta) const;
  Vector Denormalize(const Vector& unit) const;

  bool Contains(const Vector& theta) const;
  Vector Midpoint() const;
  int IndexOf(const std::string& name) const;

  // n vectors drawn uniformly from the box; identical for identical seeds.
  std::vector<ParamVector> SampleUniform(std::uint64_t seed, int n) const;

  // Number of grid points, saturating at INT64_MAX.
  std::int64_t GridSize() const;

  // All grid points in unit-cube coordinates, last coordinate fastest.
  // Throws when dim() > kMaxGridDim or GridSize() > cap.
  std::vector<Vector> UnitGrid(std::int64_t cap = kMaxGridPoints) const;

  ParameterSpace WithGridRes(int grid_res) const;

  nlohmann::json ToJson() const;
  // Accepts {"grid_res": n, "parameters": [{"name","lower","upper"}, ...]}.
  static ParameterSpace FromJson(const nlohmann::json& j);
  static ParameterSpace LoadFile(const std::string& path);

 private:
  void CheckDim(const Vector& v) const;

  std::vector<std::string> names_;
  Vector lower_;
  Vector upper_;
  int grid_res_;
};

// Relative box truth * (1 -/+ frac) around a strictly positive vector.
ParameterSpace GroundTruthBox(const ParameterSpace& space,
                              const ParamVector& truth, double frac);

// Unit hypercube [0,1]^dim with generic names, used for latent searches.
ParameterSpace UnitCube(int dim, int grid_res = 100);

}  // namespace modelid

#endif  // MODELID_PARAM_SPACE_H_
