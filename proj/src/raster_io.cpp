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

#include "sgl/raster_io.hpp"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <memory>

namespace sgl {

std::uint16_t QuantizeProbability(double p) {
  const double clamped = std::clamp(p, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::floor(clamped * kProbabilityLevels + 0.5));
}

std::string MaskFilename(std::string_view image_id, Lesion lesion) {
  return std::string(image_id) + "." + std::string(LesionCode(lesion)) + ".png";
}

std::string ProbabilityFilename(std::string_view image_id, Lesion lesion) {
  return std::string(image_id) + "." + std::string(LesionCode(lesion)) + ".prob.png";
}

RasterName ParseRasterFilename(std::string_view filename) {
  auto bad = [&](const std::string& why) {
    Fail(ErrorKind::kNaming, "raster file '" + std::string(filename) + "': " + why);
  };
  constexpr std::string_view kPng = ".png";
  constexpr std::string_view kProb = ".prob";
  if (filename.size() <= kPng.size() || !filename.ends_with(kPng)) bad("expected a .png file");
  std::string_view stem = filename.substr(0, filename.size() - kPng.size());
  RasterName name;
  if (stem.ends_with(kProb)) {
    name.probability = true;
    stem.remove_suffix(kProb.size());
  }
  const std::size_t dot = stem.rfind('.');
  if (dot == std::string_view::npos || dot == 0) bad("expected <image_id>.<LESION>");
  const auto lesion = ParseLesion(stem.substr(dot + 1));
  if (!lesion) bad("unknown lesion code '" + std::string(stem.substr(dot + 1)) + "'");
  name.image_id = std::string(stem.substr(0, dot));
  name.lesion = *lesion;
  return name;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void PngErrorHandler(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer) *buffer = message;
  png_longjmp(png, 1);
}

void PngWarningHandler(png_structp, png_const_charp) {}

}  // namespace

PngImage ReadPng(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    Fail(ErrorKind::kFormat, "'" + path + "' is not a PNG file");
  }

  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, PngErrorHandler, PngWarningHandler);
  if (!png) Fail(ErrorKind::kIo, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  PngImage image;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  volatile bool ok = true;
  if (setjmp(png_jmpbuf(png))) {
    ok = false;
  } else {
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color_type = png_get_color_type(png, info);
    image.width = static_cast<int>(png_get_image_width(png, info));
    image.height = static_cast<int>(png_get_image_height(png, info));
    image.bit_depth = png_get_bit_depth(png, info);
    switch (color_type) {
      case PNG_COLOR_TYPE_GRAY: image.channels = 1; break;
      case PNG_COLOR_TYPE_GRAY_ALPHA: image.channels = 2; break;
      case PNG_COLOR_TYPE_RGB: image.channels = 3; break;
      case PNG_COLOR_TYPE_RGB_ALPHA: image.channels = 4; break;
      default: image.channels = 0; break;  // palette
    }
    if (image.channels != 0 && (image.bit_depth == 8 || image.bit_depth == 16)) {
      if (image.bit_depth == 16 && std::endian::native == std::endian::little) {
        png_set_swap(png);
      }
      png_read_update_info(png, info);
      const std::size_t row_bytes = png_get_rowbytes(png, info);
      buffer.resize(row_bytes * static_cast<std::size_t>(image.height));
      rows.resize(static_cast<std::size_t>(image.height));
      for (int y = 0; y < image.height; ++y) {
        rows[static_cast<std::size_t>(y)] = buffer.data() + row_bytes * static_cast<std::size_t>(y);
      }
      png_read_image(png, rows.data());
      png_read_end(png, nullptr);
      const std::size_t count = static_cast<std::size_t>(image.width) *
                                static_cast<std::size_t>(image.height) *
                                static_cast<std::size_t>(image.channels);
      image.samples.resize(count);
      if (image.bit_depth == 8) {
        std::copy(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(count),
                  image.samples.begin());
      } else {
        std::memcpy(image.samples.data(), buffer.data(), count * 2);
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) Fail(ErrorKind::kFormat, "'" + path + "': corrupt PNG (" + error + ")");
  if (image.channels == 0) Fail(ErrorKind::kFormat, "'" + path + "': palette PNGs are not supported");
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    Fail(ErrorKind::kFormat, "'" + path + "': unsupported bit depth " +
                                 std::to_string(image.bit_depth));
  }
  return image;
}

void WritePng(const PngImage& image, const std::string& path) {
  int color_type = 0;
  switch (image.channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
    default: Fail(ErrorKind::kValidation, "unsupported channel count");
  }
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    Fail(ErrorKind::kValidation, "unsupported bit depth");
  }
  if (image.width < 1 || image.height < 1 ||
      image.samples.size() != static_cast<std::size_t>(image.width) *
                                  static_cast<std::size_t>(image.height) *
                                  static_cast<std::size_t>(image.channels)) {
    Fail(ErrorKind::kValidation, "PNG sample count does not match dimensions");
  }
  const std::size_t row_samples =
      static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.channels);
  const std::size_t sample_bytes = image.bit_depth == 8 ? 1 : 2;
  std::vector<png_byte> buffer(row_samples * sample_bytes * static_cast<std::size_t>(image.height));
  if (image.bit_depth == 8) {
    for (std::size_t i = 0; i < image.samples.size(); ++i) {
      buffer[i] = static_cast<png_byte>(image.samples[i]);
    }
  } else {
    // PNG stores 16-bit samples big-endian.
    for (std::size_t i = 0; i < image.samples.size(); ++i) {
      buffer[2 * i] = static_cast<png_byte>(image.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(image.samples[i] & 0xFF);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (std::size_t y = 0; y < rows.size(); ++y) {
    rows[y] = buffer.data() + y * row_samples * sample_bytes;
  }

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) Fail(ErrorKind::kIo, "cannot create '" + path + "'");
  std::string error;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, PngErrorHandler, PngWarningHandler);
  if (!png) Fail(ErrorKind::kIo, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  volatile bool ok = true;
  if (setjmp(png_jmpbuf(png))) {
    ok = false;
  } else {
    png_init_io(png, file.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), image.bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(&png, &info);
  if (!ok) Fail(ErrorKind::kIo, "'" + path + "': PNG write failed (" + error + ")");
  if (std::fflush(file.get()) != 0) Fail(ErrorKind::kIo, "'" + path + "': flush failed");
}

namespace {

std::string Basename(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

}  // namespace

LesionMask LoadMask(const std::string& path) {
  const RasterName name = ParseRasterFilename(Basename(path));
  if (name.probability) {
    Fail(ErrorKind::kNaming, "'" + path + "' is named as a probability map, not a mask");
  }
  const PngImage png = ReadPng(path);
  if (png.channels != 1 || png.bit_depth != 8) {
    Fail(ErrorKind::kFormat, "mask '" + path + "' must be 8-bit single-channel, got " +
                                 std::to_string(png.bit_depth) + "-bit with " +
                                 std::to_string(png.channels) + " channels");
  }
  LesionMask mask{name.image_id, name.lesion, MaskRaster(png.height, png.width)};
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      mask.bits(y, x) = png.samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(png.width) +
                                    static_cast<std::size_t>(x)] > 0;
    }
  }
  return mask;
}

ProbabilityMap LoadProbabilityMap(const std::string& path) {
  const RasterName name = ParseRasterFilename(Basename(path));
  if (!name.probability) {
    Fail(ErrorKind::kNaming, "'" + path + "' is not named <image_id>.<LESION>.prob.png");
  }
  const PngImage png = ReadPng(path);
  if (png.channels != 1 || png.bit_depth != 16) {
    Fail(ErrorKind::kFormat, "probability map '" + path +
                                 "' must be 16-bit single-channel, got " +
                                 std::to_string(png.bit_depth) + "-bit with " +
                                 std::to_string(png.channels) + " channels");
  }
  ProbabilityMap map{name.image_id, name.lesion, ProbRaster(png.height, png.width)};
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      map.probs(y, x) = DequantizeProbability(
          png.samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(png.width) +
                      static_cast<std::size_t>(x)]);
    }
  }
  return map;
}

FundusImage LoadFundusImage(const std::string& path) {
  const PngImage png = ReadPng(path);
  if (png.bit_depth != 8 || (png.channels != 3 && png.channels != 4)) {
    Fail(ErrorKind::kFormat, "image '" + path + "' must be 8-bit RGB");
  }
  FundusImage image;
  image.image_id = std::filesystem::path(path).stem().string();
  for (auto& channel : image.channels) channel.resize(png.height, png.width);
  std::size_t i = 0;
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        image.channels[static_cast<std::size_t>(c)](y, x) =
            static_cast<std::uint8_t>(png.samples[i + static_cast<std::size_t>(c)]);
      }
      i += static_cast<std::size_t>(png.channels);
    }
  }
  return image;
}

void SaveMask(const LesionMask& mask, const std::string& path) {
  PngImage png{mask.width(), mask.height(), 8, 1, {}};
  png.samples.reserve(static_cast<std::size_t>(mask.bits.size()));
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) png.samples.push_back(mask.bits(y, x) ? 255 : 0);
  }
  WritePng(png, path);
}

void SaveProbabilityMap(const ProbabilityMap& map, const std::string& path) {
  PngImage png{map.width(), map.height(), 16, 1, {}};
  png.samples.reserve(static_cast<std::size_t>(map.probs.size()));
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) png.samples.push_back(QuantizeProbability(map.probs(y, x)));
  }
  WritePng(png, path);
}

void SaveFundusImage(const FundusImage& image, const std::string& path) {
  PngImage png{image.width(), image.height(), 8, 3, {}};
  png.samples.reserve(static_cast<std::size_t>(image.width()) * static_cast<std::size_t>(image.height()) * 3);
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      for (const auto& channel : image.channels) png.samples.push_back(channel(y, x));
    }
  }
  WritePng(png, path);
}

FrameTransform FrameTransform::Identity(int width, int height) {
  return Fit(width, height, CropRect{0, 0, width, height}, width, height);
}

FrameTransform FrameTransform::Fit(int source_width, int source_height, CropRect crop,
                                   int target_width, int target_height) {
  if (crop.width < 1 || crop.height < 1 || target_width < 1 || target_height < 1) {
    Fail(ErrorKind::kTransform, "crop and target sizes must be positive");
  }
  FrameTransform t;
  t.source_width = source_width;
  t.source_height = source_height;
  t.crop = crop;
  t.target_width = target_width;
  t.target_height = target_height;
  t.scale = std::min(static_cast<double>(target_width) / crop.width,
                     static_cast<double>(target_height) / crop.height);
  t.scaled_width = std::clamp(static_cast<int>(std::lround(crop.width * t.scale)), 1, target_width);
  t.scaled_height =
      std::clamp(static_cast<int>(std::lround(crop.height * t.scale)), 1, target_height);
  t.pad_x = (target_width - t.scaled_width) / 2;
  t.pad_y = (target_height - t.scaled_height) / 2;
  internal::CheckTransform(t, source_height, source_width);
  return t;
}

FrameTransform ComputeCrop(const FundusImage& image, int threshold, int target_size) {
  if (threshold < 0 || threshold > 255) {
    Fail(ErrorKind::kValidation, "background threshold must be within [0, 255]");
  }
  const ByteRaster brightest =
      image.channels[0].max(image.channels[1]).max(image.channels[2]);
  int left = image.width(), right = -1, top = image.height(), bottom = -1;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (brightest(y, x) > threshold) {
        left = std::min(left, x);
        right = std::max(right, x);
        top = std::min(top, y);
        bottom = std::max(bottom, y);
      }
    }
  }
  if (right < 0) {
    Fail(ErrorKind::kEmptyContent, "image '" + image.image_id +
                                       "' has no pixel above the background threshold");
  }
  return FrameTransform::Fit(image.width(), image.height(),
                             CropRect{left, top, right - left + 1, bottom - top + 1},
                             target_size, target_size);
}

namespace internal {

void CheckTransform(const FrameTransform& t, Eigen::Index rows, Eigen::Index cols) {
  if (rows != t.source_height || cols != t.source_width) {
    Fail(ErrorKind::kTransform, "raster is " + std::to_string(cols) + "x" + std::to_string(rows) +
                                    " but the transform expects " +
                                    std::to_string(t.source_width) + "x" +
                                    std::to_string(t.source_height));
  }
  const CropRect& c = t.crop;
  if (c.left < 0 || c.top < 0 || c.width < 1 || c.height < 1 ||
      c.left + c.width > t.source_width || c.top + c.height > t.source_height) {
    Fail(ErrorKind::kTransform, "crop rectangle lies outside the source raster");
  }
  if (!(t.scale > 0.0) || t.pad_x < 0 || t.pad_y < 0 ||
      t.pad_x + t.scaled_width > t.target_width || t.pad_y + t.scaled_height > t.target_height) {
    Fail(ErrorKind::kTransform, "scaled crop does not fit in the target canvas");
  }
}

}  // namespace internal

namespace {

std::vector<int> AxisOrigins(int length, int patch_size, int stride) {
  std::vector<int> origins;
  for (int p = 0; p + patch_size <= length; p += stride) origins.push_back(p);
  if (origins.back() + patch_size < length) origins.push_back(length - patch_size);
  return origins;
}

}  // namespace

std::vector<PatchOrigin> PatchGrid(int width, int height, int patch_size, int stride) {
  if (patch_size < 1) Fail(ErrorKind::kSize, "patch size must be positive");
  if (patch_size > width || patch_size > height) {
    Fail(ErrorKind::kSize, "patch size " + std::to_string(patch_size) + " exceeds raster " +
                               std::to_string(width) + "x" + std::to_string(height));
  }
  if (stride < 1 || stride > patch_size) {
    Fail(ErrorKind::kSize, "stride must lie in [1, patch size]");
  }
  std::vector<PatchOrigin> grid;
  for (int y : AxisOrigins(height, patch_size, stride)) {
    for (int x : AxisOrigins(width, patch_size, stride)) grid.push_back({x, y});
  }
  return grid;
}

}  // namespace sgl
