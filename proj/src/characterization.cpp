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

#include "sgl/characterization.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <tuple>

#include "sgl/error.hpp"

namespace sgl {

namespace {

struct DisjointSet {
  std::vector<std::int32_t> parent;

  std::int32_t Add() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t Find(std::int32_t x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void Union(std::int32_t a, std::int32_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

std::vector<Component> ConnectedComponents(const MaskRaster& mask, Connectivity connectivity) {
  const int rows = static_cast<int>(mask.rows());
  const int cols = static_cast<int>(mask.cols());
  Raster<std::int32_t> labels = Raster<std::int32_t>::Constant(rows, cols, -1);
  DisjointSet sets;
  const bool diagonal = connectivity == Connectivity::kEight;

  // First pass: provisional labels from the already visited neighbours.
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if (!mask(y, x)) continue;
      std::int32_t label = -1;
      auto visit = [&](int yy, int xx) {
        if (yy < 0 || xx < 0 || xx >= cols) return;
        const std::int32_t other = labels(yy, xx);
        if (other < 0) return;
        if (label < 0) {
          label = other;
        } else {
          sets.Union(label, other);
        }
      };
      visit(y, x - 1);
      visit(y - 1, x);
      if (diagonal) {
        visit(y - 1, x - 1);
        visit(y - 1, x + 1);
      }
      labels(y, x) = label < 0 ? sets.Add() : label;
    }
  }

  // Second pass: areas per root. Roots are the smallest provisional label of
  // their set, and provisional labels grow in row-major order, so sorting by
  // root gives first-pixel order.
  std::vector<Component> by_root(sets.parent.size());
  std::vector<bool> seen(sets.parent.size(), false);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if (labels(y, x) < 0) continue;
      const auto root = static_cast<std::size_t>(sets.Find(labels(y, x)));
      if (!seen[root]) {
        seen[root] = true;
        by_root[root].first_x = x;
        by_root[root].first_y = y;
      }
      ++by_root[root].area;
    }
  }
  std::vector<Component> components;
  for (std::size_t i = 0; i < by_root.size(); ++i) {
    if (seen[i]) components.push_back(by_root[i]);
  }
  std::sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
    return std::tie(a.first_y, a.first_x) < std::tie(b.first_y, b.first_x);
  });
  return components;
}

std::vector<std::int64_t> ComponentAreas(const MaskRaster& mask, Connectivity connectivity) {
  std::vector<std::int64_t> areas;
  for (const Component& c : ConnectedComponents(mask, connectivity)) areas.push_back(c.area);
  return areas;
}

LesionStats ComputeLesionStats(const LesionMask& mask, Connectivity connectivity) {
  LesionStats stats;
  stats.image_id = mask.image_id;
  stats.lesion = mask.lesion;
  stats.width = mask.width();
  stats.height = mask.height();
  const auto areas = ComponentAreas(mask.bits, connectivity);
  stats.lesion_count = static_cast<std::int64_t>(areas.size());
  stats.total_area = std::accumulate(areas.begin(), areas.end(), std::int64_t{0});
  if (stats.lesion_count > 0) {
    stats.mean_area = static_cast<double>(stats.total_area) / static_cast<double>(stats.lesion_count);
  }
  return stats;
}

double HistogramSpec::AreaBinLow(int i) const {
  return log_area_min + (log_area_max - log_area_min) * i / log_area_bins;
}

double HistogramSpec::CountBinLow(int j) const {
  return log_count_min + (log_count_max - log_count_min) * j / log_count_bins;
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) Fail(ErrorKind::kArity, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(position));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = position - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

namespace {

int BinIndex(double value, double lo, double hi, int bins) {
  const int index = static_cast<int>(std::floor((value - lo) / (hi - lo) * bins));
  return std::clamp(index, 0, bins - 1);
}

}  // namespace

StyleSummary ComputeStyleSummary(std::span<const LesionStats> stats, std::string dataset_id,
                                 const HistogramSpec& spec) {
  if (spec.log_area_bins < 1 || spec.log_count_bins < 1 ||
      !(spec.log_area_max > spec.log_area_min) || !(spec.log_count_max > spec.log_count_min)) {
    Fail(ErrorKind::kValidation, "invalid histogram specification");
  }
  StyleSummary summary;
  summary.dataset_id = std::move(dataset_id);
  summary.spec = spec;
  summary.n_images = stats.size();
  summary.histogram = Eigen::ArrayXXi::Zero(spec.log_area_bins, spec.log_count_bins);
  if (!stats.empty()) summary.lesion = stats.front().lesion;

  std::vector<double> log_counts, log_areas;
  for (const auto& s : stats) {
    if (s.lesion != summary.lesion) {
      Fail(ErrorKind::kConsistency, "style summary mixes lesion codes");
    }
    if (s.lesion_count == 0 || !s.mean_area) continue;
    const double log_count = std::log10(static_cast<double>(s.lesion_count));
    const double log_area = std::log10(*s.mean_area);
    log_counts.push_back(log_count);
    log_areas.push_back(log_area);
    ++summary.histogram(
        BinIndex(log_area, spec.log_area_min, spec.log_area_max, spec.log_area_bins),
        BinIndex(log_count, spec.log_count_min, spec.log_count_max, spec.log_count_bins));
  }
  summary.n_contributing = log_counts.size();
  summary.empty = log_counts.empty();
  if (!summary.empty) {
    summary.median_log_count = Quantile(log_counts, 0.5);
    summary.median_log_area = Quantile(log_areas, 0.5);
    summary.iqr_log_count = Quantile(log_counts, 0.75) - Quantile(log_counts, 0.25);
    summary.iqr_log_area = Quantile(log_areas, 0.75) - Quantile(log_areas, 0.25);
  }
  return summary;
}

std::string_view StyleRelationName(StyleRelation relation) {
  switch (relation) {
    case StyleRelation::kCoarser: return "coarser";
    case StyleRelation::kFiner: return "finer";
    case StyleRelation::kOverlapping: return "overlapping";
  }
  return "?";
}

StyleRelation CompareStyles(const StyleSummary& a, const StyleSummary& b) {
  if (a.empty || b.empty) Fail(ErrorKind::kComparison, "cannot compare an empty style summary");
  if (a.lesion != b.lesion) {
    Fail(ErrorKind::kComparison, "style summaries describe different lesions");
  }
  const double area_margin = (a.iqr_log_area + b.iqr_log_area) / 2.0 / 2.0;
  const double count_margin = (a.iqr_log_count + b.iqr_log_count) / 2.0 / 2.0;
  const double area_gap = a.median_log_area - b.median_log_area;
  const double count_gap = a.median_log_count - b.median_log_count;
  if (area_gap > area_margin && -count_gap > count_margin) return StyleRelation::kCoarser;
  if (-area_gap > area_margin && count_gap > count_margin) return StyleRelation::kFiner;
  return StyleRelation::kOverlapping;
}

QualityDistribution ComputeQualityDistribution(const CsvTable& grades, std::string dataset_id) {
  const std::size_t column = grades.Column("grade");
  QualityDistribution dist;
  dist.dataset_id = std::move(dataset_id);
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& row : grades.rows) {
    std::string token = row[column];
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (token == "good") {
      ++counts[0];
    } else if (token == "usable") {
      ++counts[1];
    } else if (token == "reject") {
      ++counts[2];
    } else {
      Fail(ErrorKind::kParse, "unknown quality grade '" + row[column] + "'");
    }
  }
  dist.n_images = grades.rows.size();
  if (dist.n_images == 0) Fail(ErrorKind::kArity, "no graded images");
  const auto n = static_cast<double>(dist.n_images);
  dist.good = static_cast<double>(counts[0]) / n;
  dist.usable = static_cast<double>(counts[1]) / n;
  dist.reject = static_cast<double>(counts[2]) / n;
  return dist;
}

CsvTable LesionStatsToCsv(std::span<const LesionStats> stats) {
  CsvTable table;
  table.header = {"image_id", "lesion",     "width",     "height",
                  "lesion_count", "mean_area", "total_area"};
  for (const auto& s : stats) {
    table.rows.push_back({s.image_id, std::string(LesionCode(s.lesion)), std::to_string(s.width),
                          std::to_string(s.height), std::to_string(s.lesion_count),
                          s.mean_area ? FormatDouble(*s.mean_area) : std::string(),
                          std::to_string(s.total_area)});
  }
  return table;
}

std::vector<LesionStats> LesionStatsFromCsv(const CsvTable& table) {
  const std::size_t c_id = table.Column("image_id");
  const std::size_t c_lesion = table.Column("lesion");
  const std::size_t c_width = table.Column("width");
  const std::size_t c_height = table.Column("height");
  const std::size_t c_count = table.Column("lesion_count");
  const std::size_t c_mean = table.Column("mean_area");
  const std::size_t c_total = table.Column("total_area");
  std::vector<LesionStats> stats;
  for (const auto& row : table.rows) {
    LesionStats s;
    s.image_id = row[c_id];
    const auto lesion = ParseLesion(row[c_lesion]);
    if (!lesion) Fail(ErrorKind::kParse, "unknown lesion code '" + row[c_lesion] + "'");
    s.lesion = *lesion;
    s.width = static_cast<int>(ParseInteger(row[c_width]));
    s.height = static_cast<int>(ParseInteger(row[c_height]));
    s.lesion_count = ParseInteger(row[c_count]);
    s.total_area = ParseInteger(row[c_total]);
    if (!row[c_mean].empty()) s.mean_area = ParseDouble(row[c_mean]);
    if (s.lesion_count < 0 || (s.lesion_count > 0) != s.mean_area.has_value()) {
      Fail(ErrorKind::kParse, "inconsistent lesion stats for '" + s.image_id + "'");
    }
    stats.push_back(std::move(s));
  }
  return stats;
}

CsvTable HistogramToCsv(const StyleSummary& summary) {
  CsvTable table;
  table.header = {"bin_log_area_lo", "bin_log_count_lo", "count"};
  for (int i = 0; i < summary.histogram.rows(); ++i) {
    for (int j = 0; j < summary.histogram.cols(); ++j) {
      table.rows.push_back({FormatDouble(summary.spec.AreaBinLow(i)),
                            FormatDouble(summary.spec.CountBinLow(j)),
                            std::to_string(summary.histogram(i, j))});
    }
  }
  return table;
}

}  // namespace sgl
