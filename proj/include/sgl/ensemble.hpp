/*
 * Copyright 2026 The seg-genlab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SGL_ENSEMBLE_HPP
#define SGL_ENSEMBLE_HPP

#include <span>
#include <string>

#include "sgl/raster_io.hpp"

namespace sgl {

struct EnsembleMember {
  std::string member_id;  // fixes the reduction order
  ProbabilityMap map;
};

// Pixelwise mean of the member maps, accumulated in double over members sorted
// by member_id. Members must agree on image_id, lesion and size.
ProbabilityMap EnsembleAverage(std::span<const EnsembleMember> members);

}  // namespace sgl

#endif  // SGL_ENSEMBLE_HPP
