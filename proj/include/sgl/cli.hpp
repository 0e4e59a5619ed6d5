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

#ifndef SGL_CLI_HPP
#define SGL_CLI_HPP

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sgl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIntegrity = 2;

// Runs `seg-genlab <args...>` (args exclude the program name). Returns 0 on
// success, 1 on parse or validation errors and 2 on data-integrity errors.
int Dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

// Long option names declared by each subcommand, keyed by subcommand name.
std::map<std::string, std::vector<std::string>> DeclaredOptions();

}  // namespace sgl

#endif  // SGL_CLI_HPP
