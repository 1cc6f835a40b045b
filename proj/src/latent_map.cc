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

#include "modelid/latent_map.h"

#include <stdexcept>

namespace modelid {

void CheckLatentInBox(const ParameterSpace& box, const Vector& latent) {
  if (latent.size() != box.dim()) {
    throw std::invalid_argument("latent point has dimension " +
                                std::to_string(latent.size()) + ", expected " +
                                std::to_string(box.dim()));
  }
  const Vector slack = 1e-12 * (box.upper() - box.lower());
  if (!latent.allFinite() ||
      ((latent - box.lower()).array() < -slack.array()).any() ||
      ((latent - box.upper()).array() > slack.array()).any()) {
    throw std::invalid_argument("latent point outside the latent box");
  }
}

ParamVector ClipAndDenormalize(const ParameterSpace& space, const Vector& unit) {
  ParamVector theta =
      space.Denormalize(unit.cwiseMax(0.0).cwiseMin(1.0));
  return theta.cwiseMax(space.lower()).cwiseMin(space.upper());
}

}  // namespace modelid
