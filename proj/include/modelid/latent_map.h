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

#ifndef MODELID_LATENT_MAP_H_
#define MODELID_LATENT_MAP_H_

#include "modelid/param_space.h"

namespace modelid {

// Decoder from a low-dimensional latent box to the full parameter space.
// Every admissible latent point decodes to a vector inside target_space().
class LatentMap {
 public:
  virtual ~LatentMap() = default;

  virtual int latent_dim() const = 0;
  // Box searched by the optimizer, with its grid resolution.
  virtual const ParameterSpace& latent_space() const = 0;
  virtual const ParameterSpace& target_space() const = 0;

  // Throws std::invalid_argument for latent points outside latent_space().
  virtual ParamVector Decode(const Vector& latent) const = 0;
};

// Shared containment check used by the decoders; tolerates rounding of
// 1e-12 relative to the box width.
void CheckLatentInBox(const ParameterSpace& box, const Vector& latent);

// Clip a normalized vector to [0,1]^D and map it to native units.
ParamVector ClipAndDenormalize(const ParameterSpace& space, const Vector& unit);

}  // namespace modelid

#endif  // MODELID_LATENT_MAP_H_
