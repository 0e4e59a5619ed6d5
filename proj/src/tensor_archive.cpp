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

#include "sgl/tensor_archive.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgl/error.hpp"

namespace sgl {

using nlohmann::json;

std::string_view RoleName(Role role) {
  return role == Role::kEncoder ? "encoder" : "decoder";
}

std::string_view ScopeName(Scope scope) {
  switch (scope) {
    case Scope::kEncoder: return "encoder";
    case Scope::kDecoder: return "decoder";
    case Scope::kFull: return "full";
  }
  return "?";
}

Scope ParseScope(std::string_view text) {
  if (text == "encoder") return Scope::kEncoder;
  if (text == "decoder") return Scope::kDecoder;
  if (text == "full") return Scope::kFull;
  Fail(ErrorKind::kValidation, "unknown scope '" + std::string(text) + "'");
}

std::int64_t Tensor::ElementCount() const {
  std::int64_t count = 1;
  for (std::int64_t dim : shape) count *= dim;
  return count;
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape && a.values.size() == b.values.size() &&
         std::memcmp(a.values.data(), b.values.data(), a.ByteCount()) == 0;
}

namespace {

constexpr std::int64_t kMaxElements = std::int64_t{1} << 60;

bool IsValidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong encodings, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

// Product of dims, or nullopt when a dim is non-positive or the product is
// unreasonably large.
std::optional<std::int64_t> CheckedElementCount(const std::vector<std::int64_t>& shape) {
  std::int64_t count = 1;
  for (std::int64_t dim : shape) {
    if (dim <= 0 || count > kMaxElements / dim) return std::nullopt;
    count *= dim;
  }
  return count;
}

std::string ShapeText(const std::vector<std::int64_t>& shape) {
  std::string text = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) text += ",";
    text += std::to_string(shape[i]);
  }
  return text + "]";
}

bool HasPrefix(std::string_view name, std::string_view prefix) {
  return name.substr(0, prefix.size()) == prefix;
}

// Each tensor may match the prefixes of at most one role.
std::optional<std::string> FirstRoleConflict(const RolePrefixes& prefixes,
                                             const std::map<std::string, Tensor>& tensors) {
  for (const auto& [name, tensor] : tensors) {
    int roles = 0;
    for (const auto& [role, list] : prefixes) {
      if (std::any_of(list.begin(), list.end(),
                      [&](const std::string& p) { return HasPrefix(name, p); })) {
        ++roles;
      }
    }
    if (roles > 1) return name;
  }
  return std::nullopt;
}

json MetadataToJson(const ArchiveMetadata& metadata) {
  json out = metadata.extra.is_object() ? metadata.extra : json::object();
  out["model_id"] = metadata.model_id;
  out["iteration"] = metadata.iteration;
  out["hyperparam_id"] = metadata.hyperparam_id;
  if (metadata.role_prefixes) {
    json roles = json::object();
    for (const auto& [role, list] : *metadata.role_prefixes) {
      roles[std::string(RoleName(role))] = list;
    }
    out["role_prefixes"] = roles;
  }
  return out;
}

[[noreturn]] void FormatError(const std::string& what) {
  Fail(ErrorKind::kFormat, "archive manifest: " + what);
}

ArchiveMetadata MetadataFromJson(const json& in) {
  if (!in.is_object()) FormatError("metadata must be an object");
  ArchiveMetadata metadata;
  json extra = in;
  auto take_string = [&](const char* key) {
    auto it = in.find(key);
    if (it == in.end() || !it->is_string()) {
      FormatError(std::string("metadata.") + key + " must be a string");
    }
    extra.erase(key);
    return it->get<std::string>();
  };
  metadata.model_id = take_string("model_id");
  metadata.hyperparam_id = take_string("hyperparam_id");
  auto it = in.find("iteration");
  if (it == in.end() || !it->is_number_unsigned()) {
    FormatError("metadata.iteration must be a non-negative integer");
  }
  metadata.iteration = it->get<std::uint64_t>();
  extra.erase("iteration");
  if (auto rp = in.find("role_prefixes"); rp != in.end()) {
    if (!rp->is_object()) FormatError("metadata.role_prefixes must be an object");
    RolePrefixes prefixes;
    for (const auto& [key, list] : rp->items()) {
      Role role;
      if (key == "encoder") {
        role = Role::kEncoder;
      } else if (key == "decoder") {
        role = Role::kDecoder;
      } else {
        FormatError("unknown role '" + key + "' in role_prefixes");
      }
      if (!list.is_array()) FormatError("role_prefixes." + key + " must be an array");
      std::vector<std::string> values;
      for (const auto& p : list) {
        if (!p.is_string() || p.get_ref<const std::string&>().empty()) {
          FormatError("role_prefixes." + key + " entries must be non-empty strings");
        }
        values.push_back(p.get<std::string>());
      }
      prefixes[role] = std::move(values);
    }
    metadata.role_prefixes = std::move(prefixes);
    extra.erase("role_prefixes");
  }
  metadata.extra = std::move(extra);
  return metadata;
}

void PutLittleEndian64(std::string& out, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

std::uint64_t GetLittleEndian64(std::string_view bytes) {
  std::uint64_t value = 0;
  for (int i = 7; i >= 0; --i) {
    value = (value << 8) | static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]);
  }
  return value;
}

void AppendFloats(std::string& out, const Eigen::ArrayXf& values) {
  const std::size_t start = out.size();
  out.resize(start + static_cast<std::size_t>(values.size()) * 4);
  char* dst = out.data() + start;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) *dst++ = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
}

Eigen::ArrayXf ReadFloats(std::string_view bytes) {
  Eigen::ArrayXf values(static_cast<Eigen::Index>(bytes.size() / 4));
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data());
  for (Eigen::Index i = 0; i < values.size(); ++i, src += 4) {
    const std::uint32_t bits = std::uint32_t{src[0]} | (std::uint32_t{src[1]} << 8) |
                               (std::uint32_t{src[2]} << 16) |
                               (std::uint32_t{src[3]} << 24);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

}  // namespace

void ValidateArchive(const TensorArchive& archive) {
  auto invalid = [](const std::string& what) {
    Fail(ErrorKind::kValidation, "invalid archive: " + what);
  };
  if (archive.manifest_version != kManifestVersion) {
    invalid("unsupported manifest_version " + std::to_string(archive.manifest_version));
  }
  if (!IsValidUtf8(archive.metadata.model_id) || !IsValidUtf8(archive.metadata.hyperparam_id)) {
    invalid("metadata strings must be UTF-8");
  }
  if (!archive.metadata.extra.is_object()) invalid("metadata extra must be an object");
  for (const auto& [name, tensor] : archive.tensors) {
    if (name.empty()) invalid("tensor name must be non-empty");
    if (!IsValidUtf8(name)) invalid("tensor name is not valid UTF-8");
    auto count = CheckedElementCount(tensor.shape);
    if (!count) invalid("tensor '" + name + "' has non-positive shape " + ShapeText(tensor.shape));
    if (*count != tensor.values.size()) {
      invalid("tensor '" + name + "' holds " + std::to_string(tensor.values.size()) +
              " values but shape " + ShapeText(tensor.shape) + " needs " +
              std::to_string(*count));
    }
  }
  if (archive.metadata.role_prefixes) {
    for (const auto& [role, list] : *archive.metadata.role_prefixes) {
      for (const auto& p : list) {
        if (p.empty()) invalid("empty role prefix");
      }
    }
    if (auto name = FirstRoleConflict(*archive.metadata.role_prefixes, archive.tensors)) {
      invalid("tensor '" + *name + "' matches both encoder and decoder prefixes");
    }
  }
}

std::map<std::string, TensorRecord> LayoutRecords(const TensorArchive& archive) {
  std::map<std::string, TensorRecord> records;
  std::uint64_t offset = 0;
  for (const auto& [name, tensor] : archive.tensors) {
    TensorRecord record{tensor.shape, offset, tensor.ByteCount()};
    offset += record.nbytes;
    records.emplace(name, std::move(record));
  }
  return records;
}

std::string SerializeArchive(const TensorArchive& archive) {
  ValidateArchive(archive);
  json tensors = json::object();
  for (const auto& [name, record] : LayoutRecords(archive)) {
    tensors[name] = {{"dtype", "f32"},
                     {"shape", record.shape},
                     {"offset", record.offset},
                     {"nbytes", record.nbytes}};
  }
  const json manifest = {{"manifest_version", archive.manifest_version},
                         {"metadata", MetadataToJson(archive.metadata)},
                         {"tensors", tensors}};
  const std::string text = manifest.dump();

  std::string out(kArchiveMagic);
  PutLittleEndian64(out, text.size());
  out += text;
  for (const auto& [name, tensor] : archive.tensors) AppendFloats(out, tensor.values);
  return out;
}

TensorArchive ParseArchive(std::string_view bytes) {
  const std::size_t header = kArchiveMagic.size() + 8;
  if (bytes.size() < header || bytes.substr(0, kArchiveMagic.size()) != kArchiveMagic) {
    Fail(ErrorKind::kFormat, "not a tensor archive: bad magic");
  }
  const std::uint64_t manifest_length = GetLittleEndian64(bytes.substr(kArchiveMagic.size(), 8));
  if (manifest_length > bytes.size() - header) {
    Fail(ErrorKind::kFormat, "manifest length " + std::to_string(manifest_length) +
                                 " exceeds file size");
  }
  const std::string_view manifest_text = bytes.substr(header, manifest_length);
  const std::string_view data = bytes.substr(header + manifest_length);

  json manifest;
  try {
    manifest = json::parse(manifest_text);
  } catch (const json::parse_error& e) {
    FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!manifest.is_object()) FormatError("manifest must be an object");

  TensorArchive archive;
  auto version = manifest.find("manifest_version");
  if (version == manifest.end() || !version->is_number_integer()) {
    FormatError("manifest_version must be an integer");
  }
  if (version->get<std::int64_t>() != kManifestVersion) {
    FormatError("unsupported manifest_version " + version->dump());
  }
  auto metadata = manifest.find("metadata");
  if (metadata == manifest.end()) FormatError("missing metadata");
  archive.metadata = MetadataFromJson(*metadata);

  auto tensors = manifest.find("tensors");
  if (tensors == manifest.end() || !tensors->is_object()) {
    FormatError("tensors must be an object");
  }

  struct Extent {
    std::uint64_t begin, end;
    std::string name;
  };
  std::vector<Extent> extents;
  for (const auto& [name, entry] : tensors->items()) {
    if (name.empty()) FormatError("empty tensor name");
    if (!entry.is_object()) FormatError("tensor '" + name + "' entry must be an object");
    auto dtype = entry.find("dtype");
    if (dtype == entry.end() || !dtype->is_string()) {
      FormatError("tensor '" + name + "' dtype must be a string");
    }
    if (dtype->get_ref<const std::string&>() != "f32") {
      Fail(ErrorKind::kUnsupportedDtype,
           "tensor '" + name + "' has unsupported dtype '" + dtype->get<std::string>() + "'");
    }
    auto shape_it = entry.find("shape");
    if (shape_it == entry.end() || !shape_it->is_array()) {
      FormatError("tensor '" + name + "' shape must be an array");
    }
    std::vector<std::int64_t> shape;
    for (const auto& dim : *shape_it) {
      if (!dim.is_number_integer()) FormatError("tensor '" + name + "' shape must hold integers");
      shape.push_back(dim.get<std::int64_t>());
    }
    auto count = CheckedElementCount(shape);
    if (!count) FormatError("tensor '" + name + "' has non-positive shape " + ShapeText(shape));
    auto field = [&](const char* key) {
      auto it = entry.find(key);
      if (it == entry.end() || !it->is_number_unsigned()) {
        FormatError("tensor '" + name + "' " + key + " must be a non-negative integer");
      }
      return it->get<std::uint64_t>();
    };
    const std::uint64_t offset = field("offset");
    const std::uint64_t nbytes = field("nbytes");
    const auto expected = static_cast<std::uint64_t>(*count) * 4;
    if (nbytes != expected) {
      Fail(ErrorKind::kIntegrity, "tensor '" + name + "' declares nbytes=" +
                                      std::to_string(nbytes) + " but shape " +
                                      ShapeText(shape) + " needs " + std::to_string(expected));
    }
    if (offset % 4 != 0) {
      Fail(ErrorKind::kIntegrity,
           "tensor '" + name + "' offset " + std::to_string(offset) + " is not 4-byte aligned");
    }
    if (offset > data.size() || nbytes > data.size() - offset) {
      Fail(ErrorKind::kIntegrity, "tensor '" + name + "' extent [" + std::to_string(offset) +
                                      ", " + std::to_string(offset + nbytes) +
                                      ") exceeds data section of " +
                                      std::to_string(data.size()) + " bytes");
    }
    extents.push_back({offset, offset + nbytes, name});
    archive.tensors.emplace(
        name, Tensor(std::move(shape), ReadFloats(data.substr(offset, nbytes))));
  }

  std::sort(extents.begin(), extents.end(),
            [](const Extent& a, const Extent& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < extents.size(); ++i) {
    if (extents[i].begin < extents[i - 1].end) {
      Fail(ErrorKind::kIntegrity, "tensors '" + extents[i - 1].name + "' and '" +
                                      extents[i].name + "' overlap");
    }
  }

  try {
    ValidateArchive(archive);
  } catch (const Error& e) {
    Fail(ErrorKind::kFormat, e.what());
  }
  return archive;
}

TensorArchive ReadArchive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open archive '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseArchive(buffer.str());
}

void WriteArchive(const TensorArchive& archive, const std::string& path) {
  const std::string bytes = SerializeArchive(archive);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot create archive '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) Fail(ErrorKind::kIo, "write failed for archive '" + path + "'");
}

std::optional<Role> RoleOf(const ArchiveMetadata& metadata, std::string_view name) {
  if (!metadata.role_prefixes) return std::nullopt;
  for (const auto& [role, list] : *metadata.role_prefixes) {
    for (const auto& prefix : list) {
      if (HasPrefix(name, prefix)) return role;
    }
  }
  return std::nullopt;
}

std::set<std::string> PartitionByRole(const TensorArchive& archive, Scope scope) {
  std::set<std::string> names;
  if (scope == Scope::kFull) {
    for (const auto& [name, tensor] : archive.tensors) names.insert(name);
    return names;
  }
  if (!archive.metadata.role_prefixes) {
    Fail(ErrorKind::kMissingRoleMap, "scope '" + std::string(ScopeName(scope)) +
                                         "' needs role_prefixes, archive '" +
                                         archive.metadata.model_id + "' has none");
  }
  const Role wanted = scope == Scope::kEncoder ? Role::kEncoder : Role::kDecoder;
  for (const auto& [name, tensor] : archive.tensors) {
    if (RoleOf(archive.metadata, name) == wanted) names.insert(name);
  }
  return names;
}

}  // namespace sgl
