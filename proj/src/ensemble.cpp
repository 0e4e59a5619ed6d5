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

#include "sgl/ensemble.hpp"

#include <algorithm>
#include <vector>

namespace sgl {

ProbabilityMap EnsembleAverage(std::span<const EnsembleMember> members) {
  if (members.empty()) Fail(ErrorKind::kArity, "ensemble needs at least one member");
  const ProbabilityMap& first = members.front().map;
  for (const auto& member : members) {
    const ProbabilityMap& m = member.map;
    if (m.probs.rows() != first.probs.rows() || m.probs.cols() != first.probs.cols()) {
      Fail(ErrorKind::kShape, "ensemble member '" + member.member_id + "' is " +
                                  std::to_string(m.width()) + "x" + std::to_string(m.height()) +
                                  ", expected " + std::to_string(first.width()) + "x" +
                                  std::to_string(first.height()));
    }
    if (m.image_id != first.image_id || m.lesion != first.lesion) {
      Fail(ErrorKind::kConsistency, "ensemble member '" + member.member_id +
                                        "' predicts " + m.image_id + "/" +
                                        std::string(LesionCode(m.lesion)) + ", expected " +
                                        first.image_id + "/" +
                                        std::string(LesionCode(first.lesion)));
    }
  }

  std::vector<const EnsembleMember*> ordered;
  for (const auto& member : members) ordered.push_back(&member);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const EnsembleMember* a, const EnsembleMember* b) {
                     return a->member_id < b->member_id;
                   });

  ProbRaster sum = ProbRaster::Zero(first.probs.rows(), first.probs.cols());
  for (const EnsembleMember* member : ordered) sum += member->map.probs;
  ProbabilityMap out{first.image_id, first.lesion, {}};
  out.probs = (sum / static_cast<double>(ordered.size())).max(0.0).min(1.0);
  return out;
}

}  // namespace sgl
