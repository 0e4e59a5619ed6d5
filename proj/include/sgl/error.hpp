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

#ifndef SGL_ERROR_HPP
#define SGL_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgl {

// Every failure raised by the toolkit carries one of these kinds. The CLI maps
// them onto exit codes (see IsIntegrityError).
enum class ErrorKind {
  kUsage,
  kValidation,
  kParse,
  kNaming,
  kIo,
  kFormat,
  kIntegrity,
  kUnsupportedDtype,
  kMissingRoleMap,
  kIncompatibleArchives,
  kMode,
  kArity,
  kTrajectory,
  kOrdering,
  kEmptyContent,
  kTransform,
  kSize,
  kShape,
  kConsistency,
  kComparison,
  kJoin,
  kPacking,
};

std::string_view ErrorKindName(ErrorKind kind);

// True for errors caused by inconsistent or corrupt input data, as opposed to
// malformed requests.
bool IsIntegrityError(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace sgl

#endif  // SGL_ERROR_HPP
