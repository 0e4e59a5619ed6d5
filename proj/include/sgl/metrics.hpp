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

#ifndef SGL_METRICS_HPP
#define SGL_METRICS_HPP

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sgl/csv.hpp"
#include "sgl/raster_io.hpp"

namespace sgl {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

// Throws a shape error when dimensions differ.
ConfusionCounts Confusion(const MaskRaster& predicted, const MaskRaster& truth);

// 2tp / (2tp + fp + fn). Both masks empty counts as perfect agreement (1.0);
// such images are flagged degenerate.
double DiceFromCounts(const ConfusionCounts& c);
inline bool IsDiceDegenerate(const ConfusionCounts& c) { return c.tp + c.fp + c.fn == 0; }
double Dice(const LesionMask& x, const LesionMask& y);

// lesion <=> p > threshold.
LesionMask Binarize(const ProbabilityMap& map, double threshold);

// Thresholds of the binned precision-recall curve: k / 10 for k = 0..10.
inline constexpr int kPrThresholdCount = 11;
inline constexpr double PrThreshold(int k) { return k / 10.0; }

using ThresholdCounts = std::array<ConfusionCounts, kPrThresholdCount>;

ThresholdCounts CountAtThresholds(const ProbRaster& probs, const MaskRaster& truth);

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct AuprResult {
  double value = 0.0;
  // Measured points ordered by recall ascending (ties: higher threshold first).
  std::vector<PRPoint> curve;
  // Ground truth is empty, so recall is undefined and reported as 0.
  bool degenerate = false;
};

// Precision is 1 when nothing is predicted; recall is 0 when there is no
// ground truth. The area is the trapezoid rule over the sorted points, with a
// leading (recall 0, precision of the first point) vertex when recall never
// reaches 0.
AuprResult AuprFromCounts(const ThresholdCounts& counts);
AuprResult BinnedAupr(const ProbabilityMap& map, const LesionMask& truth);

enum class MetricKind { kDice, kAupr };
enum class Aggregation { kMicro, kMacro };

std::string_view MetricName(MetricKind metric);
MetricKind ParseMetric(std::string_view text);
Aggregation ParseAggregation(std::string_view text);

inline constexpr double kDefaultDiceThreshold = 0.5;

using Prediction = std::variant<ProbabilityMap, LesionMask>;

struct EvaluationPair {
  Prediction prediction;
  LesionMask truth;
};

// Everything the dataset-level metrics need from one image.
struct ImageEvaluation {
  std::string image_id;
  Lesion lesion = Lesion::kEX;
  ConfusionCounts dice_counts;  // prediction binarized at the Dice threshold
  ThresholdCounts pr_counts;
};

ImageEvaluation EvaluateImage(const Prediction& prediction, const LesionMask& truth,
                              double dice_threshold = kDefaultDiceThreshold);

struct DatasetMetricResult {
  double value = 0.0;
  std::size_t n_images = 0;
  std::size_t degenerate_images = 0;
};

// micro: metric of the counts pooled over all images. macro: unweighted mean of
// per-image values over non-degenerate images.
DatasetMetricResult DatasetMetric(std::span<const ImageEvaluation> images, MetricKind metric,
                                  Aggregation aggregation);
DatasetMetricResult DatasetMetric(std::span<const EvaluationPair> pairs, MetricKind metric,
                                  Aggregation aggregation = Aggregation::kMicro,
                                  double dice_threshold = kDefaultDiceThreshold);

struct MetricRecord {
  std::string combination_id;
  std::string test_dataset;
  Lesion lesion = Lesion::kEX;
  std::int64_t replicate_seed = 0;
  MetricKind metric = MetricKind::kDice;
  double value = 0.0;
  std::size_t n_images = 0;
  std::size_t degenerate_images = 0;
};

struct RecordGroupKey {
  std::string combination_id;
  std::string test_dataset;
  Lesion lesion = Lesion::kEX;
  MetricKind metric = MetricKind::kDice;

  auto operator<=>(const RecordGroupKey&) const = default;
};

RecordGroupKey GroupKeyOf(const MetricRecord& record);

struct ReplicateSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};

ReplicateSummary Summarize(std::span<const double> values);
// All records must share one group key.
ReplicateSummary SummarizeGroup(std::span<const MetricRecord> records);
std::map<RecordGroupKey, ReplicateSummary> AggregateReplicates(
    std::span<const MetricRecord> records);

// Metrics CSV: combination_id, test_dataset, lesion, replicate_seed, metric,
// value, n_images, degenerate_images.
CsvTable MetricRecordsToCsv(std::span<const MetricRecord> records);
std::vector<MetricRecord> MetricRecordsFromCsv(const CsvTable& table);

}  // namespace sgl

#endif  // SGL_METRICS_HPP
