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

#ifndef SGL_SYNTH_HPP
#define SGL_SYNTH_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sgl/experiment_plan.hpp"
#include "sgl/raster_io.hpp"

namespace sgl {

// fine: compact elliptical blobs. coarse: each blob is several merged lobes,
// mimicking annotators who outline clusters of lesions as one region.
enum class LabelStyle { kFine, kCoarse };

std::string_view LabelStyleName(LabelStyle style);
LabelStyle ParseLabelStyle(std::string_view text);

struct SynthConfig {
  std::uint64_t seed = 0;
  int width = 256;
  int height = 256;
  Lesion lesion = Lesion::kEX;
  double count_mean = 10.0;  // Poisson mean of blobs per image
  double area_mean = 20.0;   // mean blob area in pixels, >= 1
  LabelStyle mode = LabelStyle::kFine;
};

struct Blob {
  std::int64_t area = 0;
  int first_x = 0;  // first pixel in row-major order
  int first_y = 0;
};

struct SynthMask {
  LesionMask mask;
  // Exact component decomposition under 8-connectivity, ordered by first pixel.
  std::vector<Blob> blobs;
};

// Blob areas are 1 + Poisson(area_mean - 1). Blobs never touch, not even
// diagonally. Deterministic per (config, image_index); throws a packing error
// when a blob cannot be placed after bounded retries.
SynthMask GenerateMask(const SynthConfig& config, std::string image_id,
                       std::uint64_t image_index = 0);

// With probability `quality` a pixel's value is its ground truth, otherwise
// uniform noise. Values sit on the 16-bit grid, so they survive a PNG round
// trip exactly.
ProbabilityMap GeneratePrediction(const LesionMask& mask, double quality, std::uint64_t seed);

// Binary dilation by a disc of the given radius.
LesionMask CoarsenMask(const LesionMask& mask, int radius);

struct SynthLesionSpec {
  Lesion lesion = Lesion::kEX;
  double count_mean = 10.0;
  double area_mean = 20.0;
  LabelStyle mode = LabelStyle::kFine;
};

struct SynthDatasetConfig {
  std::string dataset_id = "SYN";
  std::uint64_t seed = 0;
  int n_images = 10;
  int width = 256;
  int height = 256;
  StyleTag style = StyleTag::kFine;
  double quality = 0.8;
  std::vector<SynthLesionSpec> lesions;
  SplitPolicy split;
};

SynthDatasetConfig SynthDatasetConfigFromJson(const nlohmann::json& j);

// Writes <out>/masks/<id>.<LESION>.png, <out>/pred/<id>.<LESION>.prob.png and
// <out>/manifest.json; returns the manifest.
DatasetManifest WriteSynthDataset(const SynthDatasetConfig& config, const std::string& out_dir,
                                  int jobs = 1);

}  // namespace sgl

#endif  // SGL_SYNTH_HPP
