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

#ifndef SGL_RASTER_IO_HPP
#define SGL_RASTER_IO_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "sgl/error.hpp"
#include "sgl/lesion.hpp"

namespace sgl {

// Rasters are indexed (row, col) = (y, x).
template <typename T>
using Raster = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MaskRaster = Raster<bool>;
using ProbRaster = Raster<double>;
using ByteRaster = Raster<std::uint8_t>;

struct LesionMask {
  std::string image_id;
  Lesion lesion = Lesion::kEX;
  MaskRaster bits;

  int width() const { return static_cast<int>(bits.cols()); }
  int height() const { return static_cast<int>(bits.rows()); }
};

struct ProbabilityMap {
  std::string image_id;
  Lesion lesion = Lesion::kEX;
  ProbRaster probs;  // values in [0, 1]

  int width() const { return static_cast<int>(probs.cols()); }
  int height() const { return static_cast<int>(probs.rows()); }
};

struct FundusImage {
  std::string image_id;
  std::array<ByteRaster, 3> channels;  // R, G, B

  int width() const { return static_cast<int>(channels[0].cols()); }
  int height() const { return static_cast<int>(channels[0].rows()); }
};

// ---------------------------------------------------------------------------
// Files

inline constexpr int kProbabilityLevels = 65535;

// p -> round(p * 65535), p clamped to [0, 1].
std::uint16_t QuantizeProbability(double p);
inline double DequantizeProbability(std::uint16_t v) {
  return static_cast<double>(v) / kProbabilityLevels;
}

struct RasterName {
  std::string image_id;
  Lesion lesion = Lesion::kEX;
  bool probability = false;
};

// "<image_id>.<LESION>.png" or "<image_id>.<LESION>.prob.png".
std::string MaskFilename(std::string_view image_id, Lesion lesion);
std::string ProbabilityFilename(std::string_view image_id, Lesion lesion);
// Parses a bare filename; throws a naming error when it does not follow the
// convention or names an unknown lesion.
RasterName ParseRasterFilename(std::string_view filename);

struct PngImage {
  int width = 0;
  int height = 0;
  int bit_depth = 0;  // 8 or 16
  int channels = 0;   // 1 (gray), 3 (RGB) or 4 (RGBA)
  std::vector<std::uint16_t> samples;  // interleaved, row-major
};

PngImage ReadPng(const std::string& path);
void WritePng(const PngImage& image, const std::string& path);

LesionMask LoadMask(const std::string& path);
ProbabilityMap LoadProbabilityMap(const std::string& path);
FundusImage LoadFundusImage(const std::string& path);

void SaveMask(const LesionMask& mask, const std::string& path);
void SaveProbabilityMap(const ProbabilityMap& map, const std::string& path);
void SaveFundusImage(const FundusImage& image, const std::string& path);

// ---------------------------------------------------------------------------
// Framing

inline constexpr int kDefaultTargetSize = 1536;
inline constexpr int kDefaultBackgroundThreshold = 10;

struct CropRect {
  int left = 0;
  int top = 0;
  int width = 0;
  int height = 0;

  bool operator==(const CropRect&) const = default;
};

// Maps a source raster onto a target canvas: crop, uniform scale, then pad.
// Target pixel (tx, ty) inside the scaled region samples source position
// crop + ((tx - pad_x + 0.5) / scale, (ty - pad_y + 0.5) / scale).
struct FrameTransform {
  int source_width = 0;
  int source_height = 0;
  CropRect crop;
  double scale = 1.0;
  int scaled_width = 0;
  int scaled_height = 0;
  int pad_x = 0;
  int pad_y = 0;
  int target_width = 0;
  int target_height = 0;

  static FrameTransform Identity(int width, int height);
  // Crop then fit into target_width x target_height, aspect preserved, centered.
  static FrameTransform Fit(int source_width, int source_height, CropRect crop,
                            int target_width, int target_height);

  bool operator==(const FrameTransform&) const = default;
};

// Tight bounding box of pixels whose max channel exceeds `threshold`, fitted
// into a target_size square.
FrameTransform ComputeCrop(const FundusImage& image,
                           int threshold = kDefaultBackgroundThreshold,
                           int target_size = kDefaultTargetSize);

enum class Interpolation { kNearest, kBilinear };

namespace internal {

void CheckTransform(const FrameTransform& t, Eigen::Index rows, Eigen::Index cols);

template <typename T>
T ConvertSample(double v) {
  if constexpr (std::is_integral_v<T>) {
    const double lo = static_cast<double>(std::numeric_limits<T>::lowest());
    const double hi = static_cast<double>(std::numeric_limits<T>::max());
    return static_cast<T>(std::clamp(std::floor(v + 0.5), lo, hi));
  } else {
    return static_cast<T>(v);
  }
}

}  // namespace internal

// Padding is zero. Nearest keeps binary rasters binary; bilinear is for images
// and probabilities and clamps sampling to the crop.
template <typename T>
Raster<T> ApplyTransform(const Raster<T>& source, const FrameTransform& t,
                         Interpolation interpolation) {
  internal::CheckTransform(t, source.rows(), source.cols());
  if constexpr (std::is_same_v<T, bool>) {
    if (interpolation != Interpolation::kNearest) {
      Fail(ErrorKind::kTransform, "binary rasters only support nearest interpolation");
    }
  }
  Raster<T> out = Raster<T>::Zero(t.target_height, t.target_width);
  const auto& c = t.crop;
  for (int sy = 0; sy < t.scaled_height; ++sy) {
    const double v = (sy + 0.5) / t.scale;
    for (int sx = 0; sx < t.scaled_width; ++sx) {
      const double u = (sx + 0.5) / t.scale;
      T value;
      if (interpolation == Interpolation::kNearest) {
        const int x = std::min(static_cast<int>(std::floor(u)), c.width - 1);
        const int y = std::min(static_cast<int>(std::floor(v)), c.height - 1);
        value = source(c.top + y, c.left + x);
      } else {
        const double fx = std::clamp(u - 0.5, 0.0, static_cast<double>(c.width - 1));
        const double fy = std::clamp(v - 0.5, 0.0, static_cast<double>(c.height - 1));
        const int x0 = static_cast<int>(fx);
        const int y0 = static_cast<int>(fy);
        const int x1 = std::min(x0 + 1, c.width - 1);
        const int y1 = std::min(y0 + 1, c.height - 1);
        const double ax = fx - x0;
        const double ay = fy - y0;
        auto at = [&](int yy, int xx) {
          return static_cast<double>(source(c.top + yy, c.left + xx));
        };
        const double top = at(y0, x0) * (1 - ax) + at(y0, x1) * ax;
        const double bottom = at(y1, x0) * (1 - ax) + at(y1, x1) * ax;
        value = internal::ConvertSample<T>(top * (1 - ay) + bottom * ay);
      }
      out(t.pad_y + sy, t.pad_x + sx) = value;
    }
  }
  return out;
}

struct PatchOrigin {
  int x = 0;
  int y = 0;

  bool operator==(const PatchOrigin&) const = default;
};

// Row-major grid; the last row/column is anchored to the raster edge so the
// patches cover every pixel. Requires 1 <= stride <= patch_size.
std::vector<PatchOrigin> PatchGrid(int width, int height, int patch_size, int stride);

template <typename T>
struct Patch {
  PatchOrigin origin;
  Raster<T> data;
};

template <typename T>
std::vector<Patch<T>> ExtractPatches(const Raster<T>& raster, int patch_size, int stride) {
  std::vector<Patch<T>> patches;
  for (const PatchOrigin& o :
       PatchGrid(static_cast<int>(raster.cols()), static_cast<int>(raster.rows()),
                 patch_size, stride)) {
    patches.push_back({o, raster.block(o.y, o.x, patch_size, patch_size)});
  }
  return patches;
}

}  // namespace sgl

#endif  // SGL_RASTER_IO_HPP
