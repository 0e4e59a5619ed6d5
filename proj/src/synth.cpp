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

#include "sgl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <numbers>
#include <tuple>

#include "sgl/csv.hpp"
#include "sgl/error.hpp"
#include "sgl/parallel.hpp"
#include "sgl/random.hpp"

namespace sgl {

std::string_view LabelStyleName(LabelStyle style) {
  return style == LabelStyle::kFine ? "fine" : "coarse";
}

LabelStyle ParseLabelStyle(std::string_view text) {
  if (text == "fine") return LabelStyle::kFine;
  if (text == "coarse") return LabelStyle::kCoarse;
  Fail(ErrorKind::kValidation, "unknown labelling mode '" + std::string(text) + "'");
}

namespace {

constexpr int kPlacementAttempts = 200;
constexpr int kLobeAttempts = 10;

struct Offset {
  int dx = 0;
  int dy = 0;
};

struct Lobe {
  double cx = 0.0;
  double cy = 0.0;
  double ax = 1.0;  // semi-axis scale along x
  double ay = 1.0;
};

// The `area` pixels closest to any lobe centre under each lobe's elliptical
// metric, ties broken randomly. For a single axis-aligned lobe the result is
// always 4-connected: stepping towards the centre strictly lowers the metric.
std::vector<Offset> GrowShape(std::int64_t area, const std::vector<Lobe>& lobes, Xoshiro256& rng) {
  const double radius = std::sqrt(static_cast<double>(area) / std::numbers::pi);
  double reach_x = 0.0, reach_y = 0.0;
  for (const Lobe& lobe : lobes) {
    reach_x = std::max(reach_x, std::abs(lobe.cx) + radius * lobe.ax);
    reach_y = std::max(reach_y, std::abs(lobe.cy) + radius * lobe.ay);
  }
  const int rx = static_cast<int>(std::ceil(reach_x)) + 2;
  const int ry = static_cast<int>(std::ceil(reach_y)) + 2;

  struct Candidate {
    double metric;
    std::uint64_t key;
    Offset offset;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>((2 * rx + 1) * (2 * ry + 1)));
  for (int dy = -ry; dy <= ry; ++dy) {
    for (int dx = -rx; dx <= rx; ++dx) {
      double metric = std::numeric_limits<double>::infinity();
      for (const Lobe& lobe : lobes) {
        const double u = (dx - lobe.cx) / lobe.ax;
        const double v = (dy - lobe.cy) / lobe.ay;
        metric = std::min(metric, u * u + v * v);
      }
      candidates.push_back({metric, rng.Next(), {dx, dy}});
    }
  }
  const auto take = static_cast<std::ptrdiff_t>(
      std::min<std::size_t>(static_cast<std::size_t>(area), candidates.size()));
  std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(),
                    [](const Candidate& a, const Candidate& b) {
                      return std::tie(a.metric, a.key) < std::tie(b.metric, b.key);
                    });
  std::vector<Offset> shape;
  for (std::ptrdiff_t i = 0; i < take; ++i) shape.push_back(candidates[static_cast<std::size_t>(i)].offset);
  return shape;
}

bool IsFourConnected(const std::vector<Offset>& shape) {
  if (shape.empty()) return true;
  int min_x = shape[0].dx, min_y = shape[0].dy, max_x = min_x, max_y = min_y;
  for (const Offset& o : shape) {
    min_x = std::min(min_x, o.dx);
    max_x = std::max(max_x, o.dx);
    min_y = std::min(min_y, o.dy);
    max_y = std::max(max_y, o.dy);
  }
  const int w = max_x - min_x + 1, h = max_y - min_y + 1;
  Raster<std::uint8_t> grid = Raster<std::uint8_t>::Zero(h, w);
  for (const Offset& o : shape) grid(o.dy - min_y, o.dx - min_x) = 1;
  std::deque<Offset> queue{{shape[0].dx - min_x, shape[0].dy - min_y}};
  grid(queue.front().dy, queue.front().dx) = 2;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const Offset p = queue.front();
    queue.pop_front();
    const Offset steps[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const Offset& s : steps) {
      const int x = p.dx + s.dx, y = p.dy + s.dy;
      if (x < 0 || y < 0 || x >= w || y >= h || grid(y, x) != 1) continue;
      grid(y, x) = 2;
      ++reached;
      queue.push_back({x, y});
    }
  }
  return reached == shape.size();
}

Lobe RandomEllipse(Xoshiro256& rng) {
  const double aspect = rng.Uniform(1.0, 2.0);
  Lobe lobe{0.0, 0.0, std::sqrt(aspect), 1.0 / std::sqrt(aspect)};
  if (rng.Uniform() < 0.5) std::swap(lobe.ax, lobe.ay);
  return lobe;
}

std::vector<Offset> BlobShape(std::int64_t area, LabelStyle mode, Xoshiro256& rng) {
  if (area <= 1) return {{0, 0}};
  if (mode == LabelStyle::kCoarse) {
    const double radius = std::sqrt(static_cast<double>(area) / std::numbers::pi);
    for (int attempt = 0; attempt < kLobeAttempts; ++attempt) {
      std::vector<Lobe> lobes{RandomEllipse(rng)};
      const int extra = 1 + static_cast<int>(rng.Below(3));
      for (int i = 0; i < extra; ++i) {
        Lobe lobe = RandomEllipse(rng);
        const double angle = rng.Uniform(0.0, 2.0 * std::numbers::pi);
        const double distance = rng.Uniform(0.3, 0.8) * radius;
        lobe.cx = std::round(distance * std::cos(angle));
        lobe.cy = std::round(distance * std::sin(angle));
        lobes.push_back(lobe);
      }
      auto shape = GrowShape(area, lobes, rng);
      if (IsFourConnected(shape)) return shape;
    }
  }
  return GrowShape(area, {RandomEllipse(rng)}, rng);
}

}  // namespace

SynthMask GenerateMask(const SynthConfig& config, std::string image_id, std::uint64_t image_index) {
  if (config.width < 1 || config.height < 1) Fail(ErrorKind::kValidation, "synthetic frame must be non-empty");
  if (!(config.count_mean >= 0.0)) Fail(ErrorKind::kValidation, "count_mean must be >= 0");
  if (!(config.area_mean >= 1.0)) Fail(ErrorKind::kValidation, "area_mean must be >= 1");

  Xoshiro256 rng(MixSeed(MixSeed(config.seed, image_index), static_cast<std::uint64_t>(config.lesion)));
  const int width = config.width, height = config.height;
  SynthMask out;
  out.mask = LesionMask{std::move(image_id), config.lesion, MaskRaster::Constant(height, width, false)};
  MaskRaster blocked = MaskRaster::Constant(height, width, false);

  const std::uint64_t count = rng.Poisson(config.count_mean);
  for (std::uint64_t b = 0; b < count; ++b) {
    const auto area = static_cast<std::int64_t>(1 + rng.Poisson(config.area_mean - 1.0));
    const std::vector<Offset> shape = BlobShape(area, config.mode, rng);
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    for (const Offset& o : shape) {
      min_x = std::min(min_x, o.dx);
      max_x = std::max(max_x, o.dx);
      min_y = std::min(min_y, o.dy);
      max_y = std::max(max_y, o.dy);
    }
    const int span_x = max_x - min_x + 1, span_y = max_y - min_y + 1;
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      if (span_x > width || span_y > height) break;
      const int ox = static_cast<int>(rng.Below(static_cast<std::uint64_t>(width - span_x + 1))) - min_x;
      const int oy = static_cast<int>(rng.Below(static_cast<std::uint64_t>(height - span_y + 1))) - min_y;
      const bool free = std::none_of(shape.begin(), shape.end(), [&](const Offset& o) {
        return blocked(oy + o.dy, ox + o.dx);
      });
      if (!free) continue;
      Blob blob{area, width, height};
      for (const Offset& o : shape) {
        const int x = ox + o.dx, y = oy + o.dy;
        out.mask.bits(y, x) = true;
        if (std::tie(y, x) < std::tie(blob.first_y, blob.first_x)) {
          blob.first_x = x;
          blob.first_y = y;
        }
        for (int ny = std::max(0, y - 1); ny <= std::min(height - 1, y + 1); ++ny) {
          for (int nx = std::max(0, x - 1); nx <= std::min(width - 1, x + 1); ++nx) {
            blocked(ny, nx) = true;
          }
        }
      }
      out.blobs.push_back(blob);
      placed = true;
    }
    if (!placed) {
      Fail(ErrorKind::kPacking, "could not place blob " + std::to_string(b + 1) + " of " +
                                    std::to_string(count) + " (area " + std::to_string(area) +
                                    ") in a " + std::to_string(width) + "x" +
                                    std::to_string(height) + " frame");
    }
  }
  std::sort(out.blobs.begin(), out.blobs.end(), [](const Blob& a, const Blob& b) {
    return std::tie(a.first_y, a.first_x) < std::tie(b.first_y, b.first_x);
  });
  return out;
}

ProbabilityMap GeneratePrediction(const LesionMask& mask, double quality, std::uint64_t seed) {
  if (!(quality >= 0.0 && quality <= 1.0)) Fail(ErrorKind::kValidation, "quality must lie in [0, 1]");
  Xoshiro256 rng(seed);
  ProbabilityMap map{mask.image_id, mask.lesion, ProbRaster(mask.height(), mask.width())};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const double keep = rng.Uniform();
      const double noise = rng.Uniform();
      const double p = keep < quality ? (mask.bits(y, x) ? 1.0 : 0.0) : noise;
      map.probs(y, x) = DequantizeProbability(QuantizeProbability(p));
    }
  }
  return map;
}

LesionMask CoarsenMask(const LesionMask& mask, int radius) {
  if (radius < 0) Fail(ErrorKind::kValidation, "dilation radius must be >= 0");
  LesionMask out{mask.image_id, mask.lesion, mask.bits};
  if (radius == 0) return out;
  const int h = mask.height(), w = mask.width();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.bits(y, x)) continue;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (dx * dx + dy * dy > radius * radius || yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
          out.bits(yy, xx) = true;
        }
      }
    }
  }
  return out;
}

SynthDatasetConfig SynthDatasetConfigFromJson(const nlohmann::json& j) {
  SynthDatasetConfig c;
  try {
    c.dataset_id = j.value("dataset_id", c.dataset_id);
    c.seed = j.value("seed", c.seed);
    c.n_images = j.value("n_images", c.n_images);
    c.width = j.value("width", c.width);
    c.height = j.value("height", c.height);
    c.style = ParseStyleTag(j.value("style", std::string("fine")));
    c.quality = j.value("quality", c.quality);
    for (const auto& l : j.at("lesions")) {
      SynthLesionSpec spec;
      spec.lesion = LesionFromCode(l.at("lesion").get<std::string>());
      spec.count_mean = l.value("count_mean", spec.count_mean);
      spec.area_mean = l.value("area_mean", spec.area_mean);
      spec.mode = ParseLabelStyle(l.value("mode", std::string("fine")));
      c.lesions.push_back(spec);
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      c.split.seed = s.value("seed", std::uint64_t{0});
      c.split.test_ratio = s.value("test_ratio", kDefaultTestRatio);
      c.split.val_ratio = s.value("val_ratio", kDefaultValRatio);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, std::string("synth config: ") + e.what());
  }
  if (c.n_images < 1) Fail(ErrorKind::kValidation, "n_images must be >= 1");
  if (c.lesions.empty()) Fail(ErrorKind::kValidation, "synth config lists no lesions");
  if (!(c.quality >= 0.0 && c.quality <= 1.0)) Fail(ErrorKind::kValidation, "quality must lie in [0, 1]");
  return c;
}

DatasetManifest WriteSynthDataset(const SynthDatasetConfig& config, const std::string& out_dir,
                                  int jobs) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root / "masks");
  fs::create_directories(root / "pred");

  DatasetManifest manifest;
  manifest.dataset_id = config.dataset_id;
  manifest.style = config.style;
  manifest.split = config.split;
  manifest.split.provided = false;
  manifest.resolution = std::make_pair(config.width, config.height);
  for (const auto& l : config.lesions) manifest.lesions.push_back(l.lesion);

  std::vector<std::string> ids;
  for (int i = 0; i < config.n_images; ++i) {
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%04d", i);
    ids.push_back(config.dataset_id + suffix);
  }

  ParallelFor(ids.size(), jobs, [&](std::size_t i) {
    for (const auto& spec : config.lesions) {
      SynthConfig cfg;
      cfg.seed = config.seed;
      cfg.width = config.width;
      cfg.height = config.height;
      cfg.lesion = spec.lesion;
      cfg.count_mean = spec.count_mean;
      cfg.area_mean = spec.area_mean;
      cfg.mode = spec.mode;
      const SynthMask synth = GenerateMask(cfg, ids[i], i);
      const std::uint64_t pred_seed =
          MixSeed(MixSeed(config.seed ^ 0x70726564ULL, i), static_cast<std::uint64_t>(spec.lesion));
      SaveMask(synth.mask, (root / "masks" / MaskFilename(ids[i], spec.lesion)).string());
      SaveProbabilityMap(GeneratePrediction(synth.mask, config.quality, pred_seed),
                         (root / "pred" / ProbabilityFilename(ids[i], spec.lesion)).string());
    }
  });

  for (const auto& id : ids) {
    ImageRecord record;
    record.image_id = id;
    for (const auto& spec : config.lesions) {
      const std::string code(LesionCode(spec.lesion));
      record.paths["mask." + code] = "masks/" + MaskFilename(id, spec.lesion);
      record.paths["pred." + code] = "pred/" + ProbabilityFilename(id, spec.lesion);
    }
    manifest.images.push_back(std::move(record));
  }
  ValidateManifest(manifest);
  WriteTextFile((root / "manifest.json").string(), ManifestToJson(manifest).dump(2) + "\n");
  return manifest;
}

}  // namespace sgl
