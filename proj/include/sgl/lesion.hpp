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

#ifndef SGL_LESION_HPP
#define SGL_LESION_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace sgl {

// Lesion classes shared by all five fundus datasets.
enum class Lesion { kEX, kCWS, kHE, kMA };

inline constexpr std::array<Lesion, 4> kAllLesions = {Lesion::kEX, Lesion::kCWS,
                                                      Lesion::kHE, Lesion::kMA};

std::string_view LesionCode(Lesion lesion);
std::optional<Lesion> ParseLesion(std::string_view code);
// Throws a naming error for unknown codes.
Lesion LesionFromCode(std::string_view code);

}  // namespace sgl

#endif  // SGL_LESION_HPP
