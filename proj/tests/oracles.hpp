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

// Reference implementations used as test oracles. Each one is written
// independently of the library code it checks: plain loops, no shared helpers.

#ifndef SGL_TESTS_ORACLES_HPP
#define SGL_TESTS_ORACLES_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "sgl/random.hpp"
#include "sgl/raster_io.hpp"

namespace sgl::testing {

// Row-major vectors of 0/1 keep the oracles free of Eigen.
struct PlainMask {
  int width = 0;
  int height = 0;
  std::vector<int> bits;
  int at(int x, int y) const { return bits[static_cast<std::size_t>(y * width + x)]; }
};

inline PlainMask ToPlain(const MaskRaster& m) {
  PlainMask out{static_cast<int>(m.cols()), static_cast<int>(m.rows()), {}};
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) out.bits.push_back(m(y, x) ? 1 : 0);
  }
  return out;
}

inline MaskRaster RandomMask(Xoshiro256& rng, int width, int height, double density) {
  MaskRaster m(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) m(y, x) = rng.Uniform() < density;
  }
  return m;
}

inline ProbRaster RandomProbs(Xoshiro256& rng, int width, int height) {
  ProbRaster p(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) p(y, x) = rng.Uniform();
  }
  return p;
}

inline LesionMask MakeMask(MaskRaster bits, std::string id = "img", Lesion lesion = Lesion::kEX) {
  return LesionMask{std::move(id), lesion, std::move(bits)};
}

inline ProbabilityMap MakeMap(ProbRaster probs, std::string id = "img",
                              Lesion lesion = Lesion::kEX) {
  return ProbabilityMap{std::move(id), lesion, std::move(probs)};
}

// Pixel-loop Dice: 2|X and Y| / (|X| + |Y|), 1 when both are empty.
inline double OracleDice(const PlainMask& x, const PlainMask& y) {
  long inter = 0;
  long sx = 0;
  long sy = 0;
  for (std::size_t i = 0; i < x.bits.size(); ++i) {
    sx += x.bits[i];
    sy += y.bits[i];
    inter += x.bits[i] & y.bits[i];
  }
  if (sx + sy == 0) return 1.0;
  return static_cast<double>(2 * inter) / static_cast<double>(sx + sy);
}

// Eleven thresholds k/10, strict p > t, precision 1 on no positives, recall 0
// on no truth, points by ascending recall (higher threshold first on ties),
// (0, first precision) prepended when recall never reaches 0.
inline double OracleAupr(const std::vector<double>& p, const std::vector<int>& y) {
  struct Pt {
    int k;
    double r;
    double pr;
  };
  std::vector<Pt> pts;
  for (int k = 0; k <= 10; ++k) {
    const double t = static_cast<double>(k) / 10.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const bool pos = p[i] > t;
      if (pos && y[i]) ++tp;
      if (pos && !y[i]) ++fp;
      if (!pos && y[i]) ++fn;
    }
    const double precision = tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
    pts.push_back({k, recall, precision});
  }
  // Insertion sort keeps this independent of the library's comparator.
  for (std::size_t i = 1; i < pts.size(); ++i) {
    for (std::size_t j = i; j > 0; --j) {
      const Pt& a = pts[j - 1];
      const Pt& b = pts[j];
      const bool out_of_order = a.r > b.r || (a.r == b.r && a.k < b.k);
      if (!out_of_order) break;
      std::swap(pts[j - 1], pts[j]);
    }
  }
  std::vector<std::pair<double, double>> poly;
  if (pts.front().r > 0.0) poly.push_back({0.0, pts.front().pr});
  for (const Pt& q : pts) poly.push_back({q.r, q.pr});
  double area = 0.0;
  for (std::size_t i = 1; i < poly.size(); ++i) {
    const double w = poly[i].first - poly[i - 1].first;
    area += w * (poly[i].second + poly[i - 1].second) / 2.0;
  }
  return area;
}

// Breadth-first flood fill; returns component areas sorted ascending.
inline std::vector<std::int64_t> OracleComponentAreas(const PlainMask& m, bool eight) {
  std::vector<int> seen(m.bits.size(), 0);
  std::vector<std::int64_t> areas;
  for (int y0 = 0; y0 < m.height; ++y0) {
    for (int x0 = 0; x0 < m.width; ++x0) {
      if (!m.at(x0, y0) || seen[static_cast<std::size_t>(y0 * m.width + x0)]) continue;
      std::deque<std::pair<int, int>> queue{{x0, y0}};
      seen[static_cast<std::size_t>(y0 * m.width + x0)] = 1;
      std::int64_t area = 0;
      while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        ++area;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!eight && dx != 0 && dy != 0) continue;
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
            const std::size_t idx = static_cast<std::size_t>(ny * m.width + nx);
            if (!m.at(nx, ny) || seen[idx]) continue;
            seen[idx] = 1;
            queue.push_back({nx, ny});
          }
        }
      }
      areas.push_back(area);
    }
  }
  std::sort(areas.begin(), areas.end());
  return areas;
}

// Unique scratch directory removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sgl_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf = {}) const {
    return leaf.empty() ? path_.string() : (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace sgl::testing

#endif  // SGL_TESTS_ORACLES_HPP
