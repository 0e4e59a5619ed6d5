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

#include "sgl/weight_averaging.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "sgl/error.hpp"

namespace sgl {

std::string_view AveragingModeName(AveragingMode mode) {
  return mode == AveragingMode::kSwa ? "swa" : "soup";
}

AveragingMode ParseAveragingMode(std::string_view text) {
  if (text == "swa") return AveragingMode::kSwa;
  if (text == "soup") return AveragingMode::kSoup;
  Fail(ErrorKind::kValidation, "unknown averaging mode '" + std::string(text) + "'");
}

TrajectorySummary ValidateSwaTrajectory(std::span<const TensorArchive* const> inputs) {
  if (inputs.empty()) Fail(ErrorKind::kArity, "SWA needs at least one checkpoint");
  TrajectorySummary summary;
  summary.n = inputs.size();
  summary.hyperparam_id = inputs.front()->metadata.hyperparam_id;
  for (const TensorArchive* archive : inputs) {
    const auto& md = archive->metadata;
    if (md.hyperparam_id != summary.hyperparam_id) {
      Fail(ErrorKind::kTrajectory, "SWA checkpoints come from different runs: '" +
                                       summary.hyperparam_id + "' and '" +
                                       md.hyperparam_id + "'");
    }
    if (!summary.iterations.empty() && md.iteration <= summary.iterations.back()) {
      Fail(ErrorKind::kOrdering, "SWA iterations must be strictly increasing, got " +
                                     std::to_string(summary.iterations.back()) + " then " +
                                     std::to_string(md.iteration));
    }
    summary.iterations.push_back(md.iteration);
  }
  return summary;
}

namespace {

void CheckSoup(std::span<const TensorArchive* const> inputs) {
  std::set<std::string> seen;
  for (const TensorArchive* archive : inputs) {
    if (!seen.insert(archive->metadata.hyperparam_id).second) {
      Fail(ErrorKind::kMode, "soup ingredients must have distinct hyperparam_id, '" +
                                 archive->metadata.hyperparam_id + "' repeats");
    }
  }
}

void CheckCompatible(const TensorArchive& base, const TensorArchive& other) {
  for (const auto& [name, tensor] : base.tensors) {
    auto it = other.tensors.find(name);
    if (it == other.tensors.end()) {
      Fail(ErrorKind::kIncompatibleArchives, "tensor '" + name + "' missing from '" +
                                                 other.metadata.model_id + "'");
    }
    if (it->second.shape != tensor.shape) {
      Fail(ErrorKind::kIncompatibleArchives, "tensor '" + name + "' shape differs in '" +
                                                 other.metadata.model_id + "'");
    }
  }
  for (const auto& [name, tensor] : other.tensors) {
    if (!base.tensors.contains(name)) {
      Fail(ErrorKind::kIncompatibleArchives, "tensor '" + name + "' in '" +
                                                 other.metadata.model_id +
                                                 "' is absent from the base");
    }
  }
}

}  // namespace

TensorArchive AverageWeights(const AveragingRequest& request) {
  if (request.inputs.empty()) Fail(ErrorKind::kArity, "averaging needs at least one input");
  std::vector<const TensorArchive*> inputs;
  for (const auto& ref : request.inputs) inputs.push_back(&ref.get());
  const TensorArchive& base = request.base ? *request.base : *inputs.front();

  for (const TensorArchive* input : inputs) CheckCompatible(base, *input);
  if (request.mode == AveragingMode::kSwa) {
    try {
      ValidateSwaTrajectory(inputs);
    } catch (const Error& e) {
      Fail(ErrorKind::kMode, e.what());
    }
  } else {
    CheckSoup(inputs);
  }

  const std::set<std::string> in_scope = PartitionByRole(base, request.scope);

  std::vector<const TensorArchive*> ordered = inputs;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TensorArchive* a, const TensorArchive* b) {
                     return std::tie(a->metadata.model_id, a->metadata.iteration,
                                     a->metadata.hyperparam_id) <
                            std::tie(b->metadata.model_id, b->metadata.iteration,
                                     b->metadata.hyperparam_id);
                   });

  TensorArchive out;
  const double n = static_cast<double>(ordered.size());
  for (const auto& [name, base_tensor] : base.tensors) {
    if (!in_scope.contains(name)) {
      out.tensors.emplace(name, base_tensor);
      continue;
    }
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(base_tensor.values.size());
    for (const TensorArchive* input : ordered) {
      sum += input->tensors.at(name).values.cast<double>();
    }
    out.tensors.emplace(name, Tensor(base_tensor.shape, (sum / n).cast<float>()));
  }

  std::vector<std::string> sources;
  std::uint64_t last_iteration = 0;
  for (const TensorArchive* input : ordered) {
    sources.push_back(input->metadata.model_id);
    last_iteration = std::max(last_iteration, input->metadata.iteration);
  }
  std::string joined;
  for (const auto& id : sources) joined += (joined.empty() ? "" : ",") + id;

  out.metadata.model_id = std::string(AveragingModeName(request.mode)) + "_" +
                          std::string(ScopeName(request.scope)) + "(" + joined + ")";
  out.metadata.iteration = last_iteration;
  out.metadata.hyperparam_id = request.mode == AveragingMode::kSwa
                                   ? inputs.front()->metadata.hyperparam_id
                                   : "soup";
  out.metadata.role_prefixes = base.metadata.role_prefixes;
  out.metadata.extra["averaging"] = {{"mode", AveragingModeName(request.mode)},
                                     {"scope", ScopeName(request.scope)},
                                     {"sources", sources},
                                     {"base", base.metadata.model_id}};
  return out;
}

}  // namespace sgl
