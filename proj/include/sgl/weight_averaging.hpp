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

#ifndef SGL_WEIGHT_AVERAGING_HPP
#define SGL_WEIGHT_AVERAGING_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sgl/tensor_archive.hpp"

namespace sgl {

// swa: checkpoints of a single run (shared hyperparam_id, increasing
// iteration). soup: final weights of runs with distinct hyperparam_ids.
enum class AveragingMode { kSwa, kSoup };

std::string_view AveragingModeName(AveragingMode mode);
AveragingMode ParseAveragingMode(std::string_view text);

struct AveragingRequest {
  std::vector<std::reference_wrapper<const TensorArchive>> inputs;
  // Supplies tensors outside the scope. Defaults to inputs.front().
  const TensorArchive* base = nullptr;
  AveragingMode mode = AveragingMode::kSoup;
  Scope scope = Scope::kFull;
};

struct TrajectorySummary {
  std::size_t n = 0;
  std::vector<std::uint64_t> iterations;
  std::string hyperparam_id;
};

TrajectorySummary ValidateSwaTrajectory(std::span<const TensorArchive* const> inputs);

// Uniform average of the in-scope tensors. Each element is accumulated in
// double over the inputs sorted by (model_id, iteration, hyperparam_id) and
// rounded to float once, so the result does not depend on input order.
TensorArchive AverageWeights(const AveragingRequest& request);

}  // namespace sgl

#endif  // SGL_WEIGHT_AVERAGING_HPP
