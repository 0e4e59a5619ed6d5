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

#ifndef SGL_EXPERIMENT_PLAN_HPP
#define SGL_EXPERIMENT_PLAN_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sgl/csv.hpp"
#include "sgl/lesion.hpp"
#include "sgl/metrics.hpp"

namespace sgl {

enum class Split { kTrain, kVal, kTest };
enum class StyleTag { kFine, kCoarse, kMixed };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view text);
std::string_view StyleTagName(StyleTag style);
StyleTag ParseStyleTag(std::string_view text);

inline constexpr double kDefaultTestRatio = 0.30;
inline constexpr double kDefaultValRatio = 0.15;  // of the non-test remainder

struct ImageRecord {
  std::string image_id;
  std::optional<Split> split;                 // required for provided splits
  std::map<std::string, std::string> paths;  // free-form: image, masks, predictions
};

struct SplitPolicy {
  bool provided = false;
  std::uint64_t seed = 0;
  double test_ratio = kDefaultTestRatio;
  double val_ratio = kDefaultValRatio;
};

struct DatasetManifest {
  std::string dataset_id;
  StyleTag style = StyleTag::kFine;
  std::vector<Lesion> lesions;
  std::vector<ImageRecord> images;
  SplitPolicy split;
  std::optional<std::pair<int, int>> resolution;  // evaluation frame, if declared
};

void ValidateManifest(const DatasetManifest& manifest);
DatasetManifest ManifestFromJson(const nlohmann::json& j);
nlohmann::json ManifestToJson(const DatasetManifest& manifest);
DatasetManifest LoadManifest(const std::string& path);

using SplitAssignment = std::map<std::string, Split>;

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

SplitCounts CountSplit(const SplitAssignment& assignment);

// test = round(test_ratio * n), val = round(val_ratio * (n - test)), rest
// train; rounding is half-up. Images are taken from a seeded shuffle of the
// sorted ids. Manifests with a provided split are passed through unchanged.
SplitAssignment GenerateSplit(const DatasetManifest& manifest, std::uint64_t seed,
                              double test_ratio = kDefaultTestRatio,
                              double val_ratio = kDefaultValRatio);
// Split per the manifest's own policy.
SplitAssignment ResolveSplit(const DatasetManifest& manifest);

struct DatasetInfo {
  std::string dataset_id;
  StyleTag style = StyleTag::kFine;
  std::size_t n_train = 0;
};

struct ComboSpec {
  std::string combination_id;        // sorted member ids joined by '+'
  std::vector<std::string> members;  // sorted
  std::size_t total_training_images = 0;
  std::vector<StyleTag> style_composition;  // parallel to members
  StyleTag style = StyleTag::kFine;         // fine/coarse if unanimous, else mixed
};

std::string CombinationId(std::vector<std::string> members);
StyleTag CombinedStyle(std::span<const StyleTag> styles);

// Every non-empty subset of the datasets not held out, ordered by
// (total_training_images, combination_id).
std::vector<ComboSpec> EnumerateCombinations(std::span<const DatasetInfo> datasets,
                                             const std::set<std::string>& held_out = {});

struct PlannedDataset {
  DatasetInfo info;
  std::size_t n_images = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  bool provided_split = false;
  std::uint64_t split_seed = 0;
  SplitAssignment assignment;
};

struct ExperimentPlan {
  std::vector<PlannedDataset> datasets;
  std::vector<ComboSpec> combinations;
  std::set<std::string> held_out;
  std::string replicate_label = "seed";
  std::vector<std::int64_t> replicate_seeds;
};

ExperimentPlan BuildPlan(std::span<const DatasetManifest> manifests,
                         const std::set<std::string>& held_out,
                         std::vector<std::int64_t> replicate_seeds,
                         std::string replicate_label = "seed");
nlohmann::json PlanToJson(const ExperimentPlan& plan);
ExperimentPlan PlanFromJson(const nlohmann::json& j);

struct ScenarioOptions {
  MetricKind metric = MetricKind::kDice;
  std::optional<Lesion> lesion;  // unset: average over the lesions present
  bool allow_missing = false;    // otherwise missing cells are a join error
};

struct ScenarioRow {
  std::string combination_id;
  std::size_t total_training_images = 0;
  StyleTag style = StyleTag::kFine;
  bool missing = false;
  ReplicateSummary summary;  // over replicate seeds
  bool best = false;
  bool worst = false;
};

struct ScenarioTable {
  std::string test_dataset;
  MetricKind metric = MetricKind::kDice;
  std::vector<ScenarioRow> rows;  // ordered by (total_training_images, id)
};

// Leave-one-out report for one test dataset: every plan combination that does
// not train on it, with the spread over replicates. For each (combination,
// replicate) the value is the mean over the selected lesions.
ScenarioTable BuildScenarioTable(const ExperimentPlan& plan,
                                 std::span<const MetricRecord> records,
                                 const std::string& test_dataset,
                                 const ScenarioOptions& options = {});
CsvTable ScenarioToCsv(const ScenarioTable& table);
nlohmann::json ScenarioToJson(const ScenarioTable& table);

// Fixed-width text table; the best row's mean carries a trailing '*'.
std::string RenderScenario(const ScenarioTable& table);

enum class Strategy {
  kBaseline,
  kEnsemble,
  kSwaEncoder,
  kSwaDecoder,
  kSwaFull,
  kSoupEncoder,
  kSoupDecoder,
  kSoupFull,
};

std::string_view StrategyName(Strategy strategy);
Strategy ParseStrategy(std::string_view text);

struct StrategyRow {
  std::string combination_id;
  // Mean over test datasets of the per-test-set mean over lesions and seeds.
  std::map<Strategy, double> score;
  std::set<Strategy> beats_baseline;
};

struct StrategyComparison {
  MetricKind metric = MetricKind::kDice;
  std::vector<Strategy> strategies;
  std::vector<StrategyRow> rows;  // ordered by combination_id
};

StrategyComparison CompareStrategies(const std::map<Strategy, std::vector<MetricRecord>>& records,
                                     MetricKind metric = MetricKind::kDice);
CsvTable StrategyComparisonToCsv(const StrategyComparison& comparison);
nlohmann::json StrategyComparisonToJson(const StrategyComparison& comparison);

}  // namespace sgl

#endif  // SGL_EXPERIMENT_PLAN_HPP
