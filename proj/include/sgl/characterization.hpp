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

#ifndef SGL_CHARACTERIZATION_HPP
#define SGL_CHARACTERIZATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sgl/csv.hpp"
#include "sgl/raster_io.hpp"

namespace sgl {

enum class Connectivity { kFour = 4, kEight = 8 };

struct Component {
  std::int64_t area = 0;
  // First pixel of the component in row-major order.
  int first_x = 0;
  int first_y = 0;
};

// Maximal connected regions of lesion pixels, ordered by their first pixel in
// row-major order.
std::vector<Component> ConnectedComponents(const MaskRaster& mask,
                                           Connectivity connectivity = Connectivity::kEight);
std::vector<std::int64_t> ComponentAreas(const MaskRaster& mask,
                                         Connectivity connectivity = Connectivity::kEight);

struct LesionStats {
  std::string image_id;
  Lesion lesion = Lesion::kEX;
  int width = 0;  // frame the areas were measured in
  int height = 0;
  std::int64_t lesion_count = 0;
  std::optional<double> mean_area;  // absent when lesion_count == 0
  std::int64_t total_area = 0;
};

LesionStats ComputeLesionStats(const LesionMask& mask,
                               Connectivity connectivity = Connectivity::kEight);

// Log10-space bins of the (mean area, lesion count) histogram. Values outside
// the range land in the edge bins.
struct HistogramSpec {
  double log_area_min = 0.0;
  double log_area_max = 6.0;
  int log_area_bins = 30;
  double log_count_min = 0.0;
  double log_count_max = 4.0;
  int log_count_bins = 20;

  double AreaBinLow(int i) const;
  double CountBinLow(int j) const;
};

struct StyleSummary {
  std::string dataset_id;
  Lesion lesion = Lesion::kEX;
  std::size_t n_images = 0;
  std::size_t n_contributing = 0;  // images with at least one lesion
  bool empty = true;
  double median_log_count = 0.0;
  double median_log_area = 0.0;
  double iqr_log_count = 0.0;
  double iqr_log_area = 0.0;
  HistogramSpec spec;
  // histogram(i, j): area bin i, count bin j.
  Eigen::ArrayXXi histogram;
};

// Linear-interpolation quantile of unsorted values, q in [0, 1].
double Quantile(std::vector<double> values, double q);

StyleSummary ComputeStyleSummary(std::span<const LesionStats> stats, std::string dataset_id,
                                 const HistogramSpec& spec = {});

enum class StyleRelation { kCoarser, kFiner, kOverlapping };
std::string_view StyleRelationName(StyleRelation relation);

// a is coarser than b when its median log-area is larger and its median
// log-count smaller, each by more than half the mean of the two IQRs.
StyleRelation CompareStyles(const StyleSummary& a, const StyleSummary& b);

enum class QualityGrade { kGood, kUsable, kReject };

struct QualityDistribution {
  std::string dataset_id;
  std::size_t n_images = 0;
  double good = 0.0;
  double usable = 0.0;
  double reject = 0.0;
};

// Expects image_id and grade columns; grades are Good, Usable or Reject
// (case-insensitive).
QualityDistribution ComputeQualityDistribution(const CsvTable& grades, std::string dataset_id);

CsvTable LesionStatsToCsv(std::span<const LesionStats> stats);
std::vector<LesionStats> LesionStatsFromCsv(const CsvTable& table);
// Columns bin_log_area_lo, bin_log_count_lo, count; every cell, row-major.
CsvTable HistogramToCsv(const StyleSummary& summary);

}  // namespace sgl

#endif  // SGL_CHARACTERIZATION_HPP
