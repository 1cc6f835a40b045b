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

#ifndef MODELID_REMBO_H_
#define MODELID_REMBO_H_

#include <cstdint>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "modelid/latent_map.h"
#include "modelid/param_space.h"

namespace modelid {

// theta = clip(0.5 + A * omega) in normalized coordinates, with A a fixed
// D x d standard-normal matrix and omega in [-sqrt(d), sqrt(d)]^d.
class RandomEmbedding : public LatentMap {
 public:
  RandomEmbedding(Eigen::MatrixXd matrix, ParameterSpace target_space,
                  int grid_res = 100);

  int latent_dim() const override { return static_cast<int>(matrix_.cols()); }
  const ParameterSpace& latent_space() const override { return latent_box_; }
  const ParameterSpace& target_space() const override { return target_; }
  ParamVector Decode(const Vector& omega) const override;

  // 0.5 + A * omega without clipping.
  Vector PreClip(const Vector& omega) const;

  const Eigen::MatrixXd& matrix() const { return matrix_; }

  nlohmann::json ToJson() const;
  static RandomEmbedding FromJson(const nlohmann::json& j);
  void Save(const std::string& path) const;
  static RandomEmbedding Load(const std::string& path);

 private:
  Eigen::MatrixXd matrix_;
  ParameterSpace target_;
  ParameterSpace latent_box_;
};

// Requires 1 <= d < space.dim(); entries are deterministic per seed.
RandomEmbedding MakeEmbedding(const ParameterSpace& space, int latent_dim,
                              std::uint64_t seed);

}  // namespace modelid

#endif  // MODELID_REMBO_H_
