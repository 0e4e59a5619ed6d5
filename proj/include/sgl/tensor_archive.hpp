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

#ifndef SGL_TENSOR_ARCHIVE_HPP
#define SGL_TENSOR_ARCHIVE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace sgl {

// On-disk layout:
//   "SGLB1\n" | u64 little-endian manifest length | JSON manifest | data
// Tensor offsets in the manifest are relative to the start of the data section.
inline constexpr std::string_view kArchiveMagic = "SGLB1\n";
inline constexpr int kManifestVersion = 1;

enum class Role { kEncoder, kDecoder };
enum class Scope { kEncoder, kDecoder, kFull };

std::string_view RoleName(Role role);
std::string_view ScopeName(Scope scope);
Scope ParseScope(std::string_view text);

// A dense f32 tensor. `values` is stored flat in row-major order.
struct Tensor {
  std::vector<std::int64_t> shape;
  Eigen::ArrayXf values;

  Tensor() = default;
  Tensor(std::vector<std::int64_t> shape_in, Eigen::ArrayXf values_in)
      : shape(std::move(shape_in)), values(std::move(values_in)) {}

  std::int64_t ElementCount() const;
  std::size_t ByteCount() const { return static_cast<std::size_t>(values.size()) * 4; }
};

// Bitwise comparison, so NaN payloads and signed zeros count.
bool operator==(const Tensor& a, const Tensor& b);

using RolePrefixes = std::map<Role, std::vector<std::string>>;

struct ArchiveMetadata {
  std::string model_id;
  std::uint64_t iteration = 0;  // training step the weights were taken at
  std::string hyperparam_id;    // identifies the training configuration
  std::optional<RolePrefixes> role_prefixes;
  // Any other metadata keys, carried through untouched.
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const ArchiveMetadata&) const = default;
};

// Manifest entry for one tensor, as laid out in a file.
struct TensorRecord {
  std::vector<std::int64_t> shape;
  std::uint64_t offset = 0;
  std::uint64_t nbytes = 0;
};

struct TensorArchive {
  int manifest_version = kManifestVersion;
  ArchiveMetadata metadata;
  // Sorted by name; this is also the order of tensors in the data section.
  std::map<std::string, Tensor> tensors;

  bool operator==(const TensorArchive&) const = default;
};

// Throws a validation error naming the first violated invariant.
void ValidateArchive(const TensorArchive& archive);

// Tensor layout used by SerializeArchive.
std::map<std::string, TensorRecord> LayoutRecords(const TensorArchive& archive);

std::string SerializeArchive(const TensorArchive& archive);
TensorArchive ParseArchive(std::string_view bytes);

TensorArchive ReadArchive(const std::string& path);
void WriteArchive(const TensorArchive& archive, const std::string& path);

// Role of a tensor name under the archive's prefix map, if any.
std::optional<Role> RoleOf(const ArchiveMetadata& metadata, std::string_view name);

// Names of the tensors an averaging scope touches. Encoder and decoder scopes
// require role_prefixes; tensors matching no prefix belong to neither.
std::set<std::string> PartitionByRole(const TensorArchive& archive, Scope scope);

}  // namespace sgl

#endif  // SGL_TENSOR_ARCHIVE_HPP
