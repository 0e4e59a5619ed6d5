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

#include "sgl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgl/error.hpp"

namespace sgl {

namespace {

void CheckSameShape(Eigen::Index rows_a, Eigen::Index cols_a, Eigen::Index rows_b,
                    Eigen::Index cols_b) {
  if (rows_a != rows_b || cols_a != cols_b) {
    Fail(ErrorKind::kShape, "raster sizes differ: " + std::to_string(cols_a) + "x" +
                                std::to_string(rows_a) + " vs " + std::to_string(cols_b) +
                                "x" + std::to_string(rows_b));
  }
}

}  // namespace

ConfusionCounts Confusion(const MaskRaster& predicted, const MaskRaster& truth) {
  CheckSameShape(predicted.rows(), predicted.cols(), truth.rows(), truth.cols());
  ConfusionCounts c;
  c.tp = static_cast<std::uint64_t>((predicted && truth).count());
  const auto predicted_count = static_cast<std::uint64_t>(predicted.count());
  const auto truth_count = static_cast<std::uint64_t>(truth.count());
  c.fp = predicted_count - c.tp;
  c.fn = truth_count - c.tp;
  c.tn = static_cast<std::uint64_t>(truth.size()) - c.tp - c.fp - c.fn;
  return c;
}

double DiceFromCounts(const ConfusionCounts& c) {
  if (IsDiceDegenerate(c)) return 1.0;
  return static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
}

double Dice(const LesionMask& x, const LesionMask& y) {
  return DiceFromCounts(Confusion(x.bits, y.bits));
}

LesionMask Binarize(const ProbabilityMap& map, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    Fail(ErrorKind::kValidation, "threshold must lie in [0, 1]");
  }
  return LesionMask{map.image_id, map.lesion, map.probs > threshold};
}

ThresholdCounts CountAtThresholds(const ProbRaster& probs, const MaskRaster& truth) {
  CheckSameShape(probs.rows(), probs.cols(), truth.rows(), truth.cols());
  // histogram[b][t]: pixels exceeding exactly the b lowest thresholds.
  std::array<std::array<std::uint64_t, 2>, kPrThresholdCount + 1> histogram{};
  for (Eigen::Index y = 0; y < probs.rows(); ++y) {
    for (Eigen::Index x = 0; x < probs.cols(); ++x) {
      const double p = probs(y, x);
      int bucket = 0;
      while (bucket < kPrThresholdCount && p > PrThreshold(bucket)) ++bucket;
      ++histogram[static_cast<std::size_t>(bucket)][truth(y, x) ? 1 : 0];
    }
  }
  const auto positives = static_cast<std::uint64_t>(truth.count());
  const auto negatives = static_cast<std::uint64_t>(truth.size()) - positives;
  ThresholdCounts counts;
  std::uint64_t tp = 0, fp = 0;
  for (int k = kPrThresholdCount - 1; k >= 0; --k) {
    // Positive at threshold k <=> bucket > k.
    tp += histogram[static_cast<std::size_t>(k + 1)][1];
    fp += histogram[static_cast<std::size_t>(k + 1)][0];
    counts[static_cast<std::size_t>(k)] = {tp, fp, positives - tp, negatives - fp};
  }
  return counts;
}

AuprResult AuprFromCounts(const ThresholdCounts& counts) {
  AuprResult result;
  result.degenerate = counts[0].tp + counts[0].fn == 0;
  for (int k = 0; k < kPrThresholdCount; ++k) {
    const ConfusionCounts& c = counts[static_cast<std::size_t>(k)];
    PRPoint point;
    point.threshold = PrThreshold(k);
    point.precision = c.tp + c.fp == 0
                          ? 1.0
                          : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    point.recall = c.tp + c.fn == 0
                       ? 0.0
                       : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    result.curve.push_back(point);
  }
  std::stable_sort(result.curve.begin(), result.curve.end(),
                   [](const PRPoint& a, const PRPoint& b) {
                     if (a.recall != b.recall) return a.recall < b.recall;
                     return a.threshold > b.threshold;
                   });
  double previous_recall = 0.0;
  double previous_precision = result.curve.front().precision;
  double area = 0.0;
  for (const PRPoint& point : result.curve) {
    area += (point.recall - previous_recall) * (point.precision + previous_precision) / 2.0;
    previous_recall = point.recall;
    previous_precision = point.precision;
  }
  result.value = std::clamp(area, 0.0, 1.0);
  return result;
}

AuprResult BinnedAupr(const ProbabilityMap& map, const LesionMask& truth) {
  return AuprFromCounts(CountAtThresholds(map.probs, truth.bits));
}

std::string_view MetricName(MetricKind metric) {
  return metric == MetricKind::kDice ? "dice" : "aupr";
}

MetricKind ParseMetric(std::string_view text) {
  if (text == "dice") return MetricKind::kDice;
  if (text == "aupr") return MetricKind::kAupr;
  Fail(ErrorKind::kValidation, "unknown metric '" + std::string(text) + "'");
}

Aggregation ParseAggregation(std::string_view text) {
  if (text == "micro") return Aggregation::kMicro;
  if (text == "macro") return Aggregation::kMacro;
  Fail(ErrorKind::kValidation, "unknown aggregation '" + std::string(text) + "'");
}

ImageEvaluation EvaluateImage(const Prediction& prediction, const LesionMask& truth,
                              double dice_threshold) {
  ImageEvaluation eval;
  eval.image_id = truth.image_id;
  eval.lesion = truth.lesion;
  std::visit(
      [&](const auto& pred) {
        using T = std::decay_t<decltype(pred)>;
        if (pred.lesion != truth.lesion) {
          Fail(ErrorKind::kConsistency, "prediction for '" + pred.image_id + "' is " +
                                            std::string(LesionCode(pred.lesion)) +
                                            " but ground truth is " +
                                            std::string(LesionCode(truth.lesion)));
        }
        if constexpr (std::is_same_v<T, ProbabilityMap>) {
          eval.dice_counts = Confusion(Binarize(pred, dice_threshold).bits, truth.bits);
          eval.pr_counts = CountAtThresholds(pred.probs, truth.bits);
        } else {
          eval.dice_counts = Confusion(pred.bits, truth.bits);
          eval.pr_counts = CountAtThresholds(pred.bits.template cast<double>(), truth.bits);
        }
      },
      prediction);
  return eval;
}

DatasetMetricResult DatasetMetric(std::span<const ImageEvaluation> images, MetricKind metric,
                                  Aggregation aggregation) {
  if (images.empty()) Fail(ErrorKind::kArity, "dataset metric needs at least one image");
  for (const auto& image : images) {
    if (image.lesion != images.front().lesion) {
      Fail(ErrorKind::kConsistency, "dataset mixes lesion codes " +
                                        std::string(LesionCode(images.front().lesion)) +
                                        " and " + std::string(LesionCode(image.lesion)));
    }
  }
  DatasetMetricResult result;
  result.n_images = images.size();

  ConfusionCounts pooled_dice;
  ThresholdCounts pooled_pr{};
  double macro_sum = 0.0;
  std::size_t macro_n = 0;
  for (const auto& image : images) {
    double value = 0.0;
    bool degenerate = false;
    if (metric == MetricKind::kDice) {
      pooled_dice += image.dice_counts;
      degenerate = IsDiceDegenerate(image.dice_counts);
      value = DiceFromCounts(image.dice_counts);
    } else {
      for (std::size_t k = 0; k < pooled_pr.size(); ++k) pooled_pr[k] += image.pr_counts[k];
      if (aggregation == Aggregation::kMacro) {
        const AuprResult aupr = AuprFromCounts(image.pr_counts);
        degenerate = aupr.degenerate;
        value = aupr.value;
      } else {
        degenerate = image.pr_counts[0].tp + image.pr_counts[0].fn == 0;
      }
    }
    if (degenerate) {
      ++result.degenerate_images;
    } else {
      macro_sum += value;
      ++macro_n;
    }
  }
  const double micro = metric == MetricKind::kDice ? DiceFromCounts(pooled_dice)
                                                   : AuprFromCounts(pooled_pr).value;
  if (aggregation == Aggregation::kMicro || macro_n == 0) {
    result.value = micro;
  } else {
    result.value = macro_sum / static_cast<double>(macro_n);
  }
  return result;
}

DatasetMetricResult DatasetMetric(std::span<const EvaluationPair> pairs, MetricKind metric,
                                  Aggregation aggregation, double dice_threshold) {
  std::vector<ImageEvaluation> images;
  images.reserve(pairs.size());
  for (const auto& pair : pairs) {
    images.push_back(EvaluateImage(pair.prediction, pair.truth, dice_threshold));
  }
  return DatasetMetric(images, metric, aggregation);
}

RecordGroupKey GroupKeyOf(const MetricRecord& record) {
  return {record.combination_id, record.test_dataset, record.lesion, record.metric};
}

ReplicateSummary Summarize(std::span<const double> values) {
  if (values.empty()) Fail(ErrorKind::kArity, "cannot summarise an empty group");
  ReplicateSummary s;
  s.n = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

ReplicateSummary SummarizeGroup(std::span<const MetricRecord> records) {
  if (records.empty()) Fail(ErrorKind::kArity, "cannot summarise an empty group");
  const RecordGroupKey key = GroupKeyOf(records.front());
  std::vector<double> values;
  for (const auto& record : records) {
    if (GroupKeyOf(record) != key) {
      Fail(ErrorKind::kConsistency,
           "replicate group mixes (" + key.combination_id + ", " + key.test_dataset + ", " +
               std::string(LesionCode(key.lesion)) + ", " + std::string(MetricName(key.metric)) +
               ") with (" + record.combination_id + ", " + record.test_dataset + ", " +
               std::string(LesionCode(record.lesion)) + ", " +
               std::string(MetricName(record.metric)) + ")");
    }
    values.push_back(record.value);
  }
  return Summarize(values);
}

std::map<RecordGroupKey, ReplicateSummary> AggregateReplicates(
    std::span<const MetricRecord> records) {
  std::map<RecordGroupKey, std::vector<double>> groups;
  for (const auto& record : records) groups[GroupKeyOf(record)].push_back(record.value);
  std::map<RecordGroupKey, ReplicateSummary> out;
  for (const auto& [key, values] : groups) out.emplace(key, Summarize(values));
  return out;
}

CsvTable MetricRecordsToCsv(std::span<const MetricRecord> records) {
  CsvTable table;
  table.header = {"combination_id", "test_dataset", "lesion", "replicate_seed",
                  "metric", "value", "n_images", "degenerate_images"};
  for (const auto& r : records) {
    table.rows.push_back({r.combination_id, r.test_dataset, std::string(LesionCode(r.lesion)),
                          std::to_string(r.replicate_seed), std::string(MetricName(r.metric)),
                          FormatDouble(r.value), std::to_string(r.n_images),
                          std::to_string(r.degenerate_images)});
  }
  return table;
}

std::vector<MetricRecord> MetricRecordsFromCsv(const CsvTable& table) {
  const std::size_t c_combo = table.Column("combination_id");
  const std::size_t c_test = table.Column("test_dataset");
  const std::size_t c_lesion = table.Column("lesion");
  const std::size_t c_seed = table.Column("replicate_seed");
  const std::size_t c_metric = table.Column("metric");
  const std::size_t c_value = table.Column("value");
  const std::size_t c_n = table.Column("n_images");
  const std::size_t c_degenerate = table.Column("degenerate_images");
  std::vector<MetricRecord> records;
  for (const auto& row : table.rows) {
    MetricRecord r;
    r.combination_id = row[c_combo];
    r.test_dataset = row[c_test];
    const auto lesion = ParseLesion(row[c_lesion]);
    if (!lesion) Fail(ErrorKind::kParse, "unknown lesion code '" + row[c_lesion] + "'");
    r.lesion = *lesion;
    r.replicate_seed = ParseInteger(row[c_seed]);
    try {
      r.metric = ParseMetric(row[c_metric]);
    } catch (const Error& e) {
      Fail(ErrorKind::kParse, e.what());
    }
    r.value = ParseDouble(row[c_value]);
    if (!(r.value >= 0.0 && r.value <= 1.0)) {
      Fail(ErrorKind::kParse, "metric value " + row[c_value] + " outside [0, 1]");
    }
    const long long n = ParseInteger(row[c_n]);
    const long long degenerate = ParseInteger(row[c_degenerate]);
    if (n < 0 || degenerate < 0) Fail(ErrorKind::kParse, "negative image count");
    r.n_images = static_cast<std::size_t>(n);
    r.degenerate_images = static_cast<std::size_t>(degenerate);
    if (r.combination_id.empty() || r.test_dataset.empty()) {
      Fail(ErrorKind::kParse, "records need combination_id and test_dataset");
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace sgl
