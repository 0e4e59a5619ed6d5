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

#include "sgl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgl/characterization.hpp"
#include "sgl/csv.hpp"
#include "sgl/ensemble.hpp"
#include "sgl/error.hpp"
#include "sgl/experiment_plan.hpp"
#include "sgl/metrics.hpp"
#include "sgl/parallel.hpp"
#include "sgl/synth.hpp"
#include "sgl/tensor_archive.hpp"
#include "sgl/weight_averaging.hpp"

namespace sgl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  int jobs = 1;
  bool verbose = false;
  bool meta = false;

  // synth
  std::string synth_config;
  std::string synth_out;

  // characterize
  std::string masks_dir;
  std::string char_lesion;
  std::string stats_out;
  std::string hist_out;
  std::string summary_out;
  std::string char_dataset;
  int connectivity = 8;

  // quality
  std::string grades;
  std::string quality_out;
  std::string quality_dataset;

  // plan
  std::string manifests_dir;
  std::string plan_out;
  std::string hold_out;
  std::string seeds;
  int replicates = 8;
  std::string replicate_label = "seed";

  // average
  std::string avg_mode;
  std::string avg_scope;
  std::string avg_base;
  std::string avg_out;
  std::vector<std::string> avg_inputs;

  // ensemble
  std::string ens_out;
  std::vector<std::string> ens_inputs;

  // metrics
  std::string pred_dir;
  std::string truth_dir;
  std::string lesions = "EX,HE,MA,CWS";
  std::string metric_list = "dice,aupr";
  std::string aggregation = "micro";
  std::string metrics_out;
  std::string combination = "none";
  std::string test_dataset;
  std::int64_t replicate_seed = 0;
  double dice_threshold = kDefaultDiceThreshold;

  // report
  std::string report_plan;
  std::vector<std::string> report_records;
  std::string scenario;
  bool strategies = false;
  std::vector<std::string> strategy_inputs;
  std::string report_metric = "dice";
  std::string report_lesion;
  bool allow_missing = false;
  std::string report_out;
  std::string report_json;
};

struct App {
  std::unique_ptr<CLI::App> root;
  std::map<std::string, CLI::App*> subcommands;
};

App BuildApp(RunConfig& c) {
  App app;
  app.root = std::make_unique<CLI::App>(
      "seg-genlab: weight averaging, ensembling, metrics and dataset characterisation for "
      "lesion segmentation studies",
      "seg-genlab");
  CLI::App& root = *app.root;
  root.set_version_flag("--version", kVersion);
  root.require_subcommand(1);
  root.fallthrough();
  root.failure_message(CLI::FailureMessage::help);
  root.add_option("--jobs", c.jobs, "Worker threads for per-image work (output is identical for any value)")
      ->check(CLI::Range(1, 1024));
  root.add_flag("--verbose", c.verbose, "Print progress details");
  root.add_flag("--meta", c.meta, "Append a provenance footer (version, host, time) to outputs");

  auto* synth = root.add_subcommand("synth", "Generate a synthetic dataset: masks, predictions, manifest");
  synth->add_option("--config", c.synth_config, "Synthetic dataset configuration (JSON)")
      ->required()->check(CLI::ExistingFile);
  synth->add_option("--out", c.synth_out, "Output directory")->required();

  auto* characterize = root.add_subcommand("characterize", "Per-image lesion count / mean area and log-space histogram");
  characterize->add_option("--masks", c.masks_dir, "Directory of <image_id>.<LESION>.png masks")
      ->required()->check(CLI::ExistingDirectory);
  characterize->add_option("--lesion", c.char_lesion, "Lesion code (EX, CWS, HE, MA)")->required();
  characterize->add_option("--out", c.stats_out, "Per-image statistics CSV")->required();
  characterize->add_option("--hist", c.hist_out, "Histogram CSV (bin_log_area_lo, bin_log_count_lo, count)");
  characterize->add_option("--summary", c.summary_out, "Style summary JSON (medians, IQRs)");
  characterize->add_option("--dataset", c.char_dataset, "Dataset id recorded in the summary (default: directory name)");
  characterize->add_option("--connectivity", c.connectivity, "Pixel adjacency for lesion counting: 4 or 8")
      ->check(CLI::IsMember({4, 8}));

  auto* quality = root.add_subcommand("quality", "Normalised image-quality grade distribution");
  quality->add_option("--grades", c.grades, "CSV with image_id,grade (Good, Usable, Reject)")
      ->required()->check(CLI::ExistingFile);
  quality->add_option("--out", c.quality_out, "Distribution CSV")->required();
  quality->add_option("--dataset", c.quality_dataset, "Dataset id recorded in the output (default: file stem)");

  auto* plan = root.add_subcommand("plan", "Enumerate training-set combinations from dataset manifests");
  plan->add_option("--datasets", c.manifests_dir, "Directory of dataset manifest JSON files")
      ->required()->check(CLI::ExistingDirectory);
  plan->add_option("--out", c.plan_out, "Plan JSON")->required();
  plan->add_option("--hold-out", c.hold_out, "Comma-separated dataset ids excluded from training");
  auto* seeds = plan->add_option("--seeds", c.seeds, "Comma-separated replicate seeds");
  auto* replicates = plan->add_option("--replicates", c.replicates, "Number of replicates, seeds 0..N-1 (default 8)")
                         ->check(CLI::Range(1, 1000000));
  seeds->excludes(replicates);
  plan->add_option("--replicate-label", c.replicate_label, "What distinguishes replicates (e.g. seed, hyperparameters)");

  auto* average = root.add_subcommand("average", "SWA / model-soup weight averaging of tensor archives");
  average->add_option("--mode", c.avg_mode, "swa or soup")->required()->check(CLI::IsMember({"swa", "soup"}));
  average->add_option("--scope", c.avg_scope, "encoder, decoder or full")
      ->required()->check(CLI::IsMember({"encoder", "decoder", "full"}));
  average->add_option("--base", c.avg_base, "Archive supplying out-of-scope tensors (default: first input)")
      ->check(CLI::ExistingFile);
  average->add_option("--out", c.avg_out, "Output archive")->required();
  average->add_option("inputs", c.avg_inputs, "Input archives")->required()->check(CLI::ExistingFile);

  auto* ensemble = root.add_subcommand("ensemble", "Average probability maps across prediction directories");
  ensemble->add_option("--out", c.ens_out, "Output directory")->required();
  ensemble->add_option("inputs", c.ens_inputs, "Prediction directories (files paired by name)")
      ->required()->check(CLI::ExistingDirectory);

  auto* metrics = root.add_subcommand("metrics", "Dice and binned AUPR of predictions against ground truth");
  metrics->add_option("--pred", c.pred_dir, "Prediction directory (<id>.<LESION>.prob.png or binary .png)")
      ->required()->check(CLI::ExistingDirectory);
  metrics->add_option("--truth", c.truth_dir, "Ground-truth mask directory")
      ->required()->check(CLI::ExistingDirectory);
  metrics->add_option("--lesions", c.lesions, "Comma-separated lesion codes (default EX,HE,MA,CWS)");
  metrics->add_option("--metric", c.metric_list, "Comma-separated metrics: dice, aupr");
  metrics->add_option("--agg", c.aggregation, "micro (pooled counts) or macro (mean over images)")
      ->check(CLI::IsMember({"micro", "macro"}));
  metrics->add_option("--out", c.metrics_out, "Report CSV")->required();
  metrics->add_option("--combination", c.combination, "combination_id written to each record");
  metrics->add_option("--test-dataset", c.test_dataset, "test_dataset written to each record (default: truth directory name)");
  metrics->add_option("--seed", c.replicate_seed, "replicate_seed written to each record");
  metrics->add_option("--dice-threshold", c.dice_threshold, "Probability threshold for Dice (strict >)")
      ->check(CLI::Range(0.0, 1.0));

  auto* report = root.add_subcommand("report", "Leave-one-out scenario table or strategy comparison");
  report->add_option("--plan", c.report_plan, "Plan JSON (scenario reports)")->check(CLI::ExistingFile);
  report->add_option("--records", c.report_records, "Metrics CSV files (scenario reports)")
      ->check(CLI::ExistingFile);
  auto* scenario = report->add_option("--scenario", c.scenario, "Held-out test dataset id");
  auto* strategies = report->add_flag("--strategies", c.strategies, "Compare generalisation strategies");
  scenario->excludes(strategies);
  report->add_option("--strategy", c.strategy_inputs, "strategy=metrics.csv (baseline, ensemble, swa_encoder, swa_decoder, swa_full, soup_encoder, soup_decoder, soup_full)");
  report->add_option("--metric", c.report_metric, "Metric to report")->check(CLI::IsMember({"dice", "aupr"}));
  report->add_option("--lesion", c.report_lesion, "Restrict to one lesion (default: mean over lesions)");
  report->add_flag("--allow-missing", c.allow_missing, "Mark missing cells instead of failing");
  report->add_option("--out", c.report_out, "Report CSV")->required();
  report->add_option("--json", c.report_json, "Report JSON");

  for (CLI::App* sub : {synth, characterize, quality, plan, average, ensemble, metrics, report}) {
    app.subcommands[sub->get_name()] = sub;
  }
  return app;
}

std::string OneLine(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '"', '\'');
  return text;
}

std::string MetaFooter(const RunConfig& c) {
  if (!c.meta) return {};
  char host[256] = {};
  gethostname(host, sizeof(host) - 1);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return std::string("# generated-by=seg-genlab ") + kVersion + "\n# host=" + host +
         "\n# time=" + stamp + "\n";
}

void WriteCsvOutput(const RunConfig& c, const std::string& path, const CsvTable& table,
                    const std::string& extra_meta = {}) {
  std::string text = ToCsv(table);
  if (c.meta) text += MetaFooter(c) + extra_meta;
  WriteTextFile(path, text);
}

void WriteJsonOutput(const RunConfig& c, const std::string& path, json j) {
  if (c.meta) {
    j["_meta"] = {{"generated_by", std::string("seg-genlab ") + kVersion},
                  {"footer", MetaFooter(c)}};
  }
  WriteTextFile(path, j.dump(2) + "\n");
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::vector<fs::path> SortedFiles(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<Lesion> ParseLesionList(const std::string& text) {
  std::vector<Lesion> lesions;
  for (const auto& code : SplitList(text, ',')) {
    const auto lesion = ParseLesion(code);
    if (!lesion) Fail(ErrorKind::kValidation, "unknown lesion code '" + code + "'");
    if (std::find(lesions.begin(), lesions.end(), *lesion) == lesions.end()) lesions.push_back(*lesion);
  }
  if (lesions.empty()) Fail(ErrorKind::kValidation, "no lesion codes given");
  return lesions;
}

std::string DirName(const std::string& dir) {
  fs::path p = fs::path(dir).lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

int RunSynth(const RunConfig& c, std::ostream& out) {
  json j;
  try {
    j = json::parse(ReadTextFile(c.synth_config));
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kParse, "synth config: " + std::string(e.what()));
  }
  const SynthDatasetConfig config = SynthDatasetConfigFromJson(j);
  const DatasetManifest manifest = WriteSynthDataset(config, c.synth_out, c.jobs);
  out << "synth: wrote " << manifest.images.size() << " images of " << manifest.dataset_id
      << " to " << c.synth_out << "\n";
  return kExitOk;
}

int RunCharacterize(const RunConfig& c, std::ostream& out) {
  const Lesion lesion = LesionFromCode(c.char_lesion);
  std::vector<fs::path> files;
  for (const auto& path : SortedFiles(c.masks_dir)) {
    if (path.extension() != ".png") continue;
    RasterName name;
    try {
      name = ParseRasterFilename(path.filename().string());
    } catch (const Error&) {
      continue;
    }
    if (!name.probability && name.lesion == lesion) files.push_back(path);
  }
  if (files.empty()) {
    Fail(ErrorKind::kArity, "no " + std::string(LesionCode(lesion)) + " masks in " + c.masks_dir);
  }
  const Connectivity connectivity = c.connectivity == 4 ? Connectivity::kFour : Connectivity::kEight;
  std::vector<LesionStats> stats(files.size());
  ParallelFor(files.size(), c.jobs, [&](std::size_t i) {
    stats[i] = ComputeLesionStats(LoadMask(files[i].string()), connectivity);
  });
  EnsureParent(c.stats_out);
  WriteCsvOutput(c, c.stats_out, LesionStatsToCsv(stats));

  const std::string dataset = c.char_dataset.empty() ? DirName(c.masks_dir) : c.char_dataset;
  const StyleSummary summary = ComputeStyleSummary(stats, dataset);
  if (!c.hist_out.empty()) {
    EnsureParent(c.hist_out);
    WriteCsvOutput(c, c.hist_out, HistogramToCsv(summary));
  }
  if (!c.summary_out.empty()) {
    json j = {{"dataset_id", summary.dataset_id},
              {"lesion", LesionCode(summary.lesion)},
              {"connectivity", c.connectivity},
              {"n_images", summary.n_images},
              {"n_contributing", summary.n_contributing},
              {"empty", summary.empty}};
    if (!summary.empty) {
      j["median_log_count"] = summary.median_log_count;
      j["median_log_area"] = summary.median_log_area;
      j["iqr_log_count"] = summary.iqr_log_count;
      j["iqr_log_area"] = summary.iqr_log_area;
    }
    std::set<std::pair<int, int>> frames;
    for (const auto& s : stats) frames.insert({s.width, s.height});
    json resolutions = json::array();
    for (const auto& [w, h] : frames) resolutions.push_back({w, h});
    j["resolutions"] = resolutions;
    EnsureParent(c.summary_out);
    WriteJsonOutput(c, c.summary_out, j);
  }
  out << "characterize: " << stats.size() << " masks, " << summary.n_contributing
      << " with lesions\n";
  return kExitOk;
}

int RunQuality(const RunConfig& c, std::ostream& out) {
  const std::string dataset =
      c.quality_dataset.empty() ? fs::path(c.grades).stem().string() : c.quality_dataset;
  const QualityDistribution dist = ComputeQualityDistribution(ReadCsvFile(c.grades), dataset);
  CsvTable table;
  table.header = {"dataset_id", "grade", "fraction", "n_images"};
  const std::string n = std::to_string(dist.n_images);
  table.rows.push_back({dataset, "Good", FormatDouble(dist.good), n});
  table.rows.push_back({dataset, "Usable", FormatDouble(dist.usable), n});
  table.rows.push_back({dataset, "Reject", FormatDouble(dist.reject), n});
  EnsureParent(c.quality_out);
  WriteCsvOutput(c, c.quality_out, table);
  out << "quality: " << dist.n_images << " graded images\n";
  return kExitOk;
}

int RunPlan(const RunConfig& c, std::ostream& out) {
  std::vector<DatasetManifest> manifests;
  for (const auto& path : SortedFiles(c.manifests_dir)) {
    if (path.extension() == ".json") manifests.push_back(LoadManifest(path.string()));
  }
  if (manifests.empty()) Fail(ErrorKind::kArity, "no manifest JSON files in " + c.manifests_dir);
  std::set<std::string> held_out;
  for (const auto& id : SplitList(c.hold_out, ',')) held_out.insert(id);
  std::vector<std::int64_t> seeds;
  if (!c.seeds.empty()) {
    for (const auto& s : SplitList(c.seeds, ',')) seeds.push_back(ParseInteger(s));
  } else {
    for (int i = 0; i < c.replicates; ++i) seeds.push_back(i);
  }
  const ExperimentPlan plan = BuildPlan(manifests, held_out, seeds, c.replicate_label);
  EnsureParent(c.plan_out);
  WriteJsonOutput(c, c.plan_out, PlanToJson(plan));
  out << "plan: " << plan.datasets.size() << " datasets, " << plan.combinations.size()
      << " combinations, " << plan.replicate_seeds.size() << " replicates\n";
  return kExitOk;
}

int RunAverage(const RunConfig& c, std::ostream& out) {
  std::vector<TensorArchive> inputs;
  for (const auto& path : c.avg_inputs) inputs.push_back(ReadArchive(path));
  std::optional<TensorArchive> base;
  if (!c.avg_base.empty()) base = ReadArchive(c.avg_base);
  AveragingRequest request;
  for (const auto& a : inputs) request.inputs.emplace_back(a);
  request.base = base ? &*base : nullptr;
  request.mode = ParseAveragingMode(c.avg_mode);
  request.scope = ParseScope(c.avg_scope);
  const TensorArchive result = AverageWeights(request);
  EnsureParent(c.avg_out);
  WriteArchive(result, c.avg_out);
  out << "average: " << c.avg_mode << "/" << c.avg_scope << " over " << inputs.size()
      << " archives -> " << c.avg_out << "\n";
  return kExitOk;
}

int RunEnsemble(const RunConfig& c, std::ostream& out) {
  std::set<std::string> names;
  std::vector<std::set<std::string>> per_dir;
  for (const auto& dir : c.ens_inputs) {
    std::set<std::string> files;
    for (const auto& path : SortedFiles(dir)) {
      const std::string filename = path.filename().string();
      if (filename.ends_with(".prob.png")) files.insert(filename);
    }
    names.insert(files.begin(), files.end());
    per_dir.push_back(std::move(files));
  }
  if (names.empty()) Fail(ErrorKind::kArity, "no probability maps found in the input directories");
  for (std::size_t d = 0; d < per_dir.size(); ++d) {
    for (const auto& name : names) {
      if (!per_dir[d].contains(name)) {
        Fail(ErrorKind::kJoin, "'" + name + "' is missing from " + c.ens_inputs[d]);
      }
    }
  }
  const std::vector<std::string> ordered(names.begin(), names.end());
  fs::create_directories(c.ens_out);
  ParallelFor(ordered.size(), c.jobs, [&](std::size_t i) {
    std::vector<EnsembleMember> members;
    for (const auto& dir : c.ens_inputs) {
      members.push_back({dir, LoadProbabilityMap((fs::path(dir) / ordered[i]).string())});
    }
    SaveProbabilityMap(EnsembleAverage(members), (fs::path(c.ens_out) / ordered[i]).string());
  });
  out << "ensemble: " << ordered.size() << " maps from " << c.ens_inputs.size()
      << " members -> " << c.ens_out << "\n";
  return kExitOk;
}

int RunMetrics(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::vector<Lesion> lesions = ParseLesionList(c.lesions);
  std::vector<MetricKind> metrics;
  for (const auto& m : SplitList(c.metric_list, ',')) metrics.push_back(ParseMetric(m));
  if (metrics.empty()) Fail(ErrorKind::kValidation, "no metrics given");
  const Aggregation aggregation = ParseAggregation(c.aggregation);
  const std::string test_dataset = c.test_dataset.empty() ? DirName(c.truth_dir) : c.test_dataset;

  struct Job {
    fs::path truth;
    fs::path prediction;
    bool probability = true;
    Lesion lesion;
  };
  std::vector<Job> jobs;
  for (const auto& path : SortedFiles(c.truth_dir)) {
    if (path.extension() != ".png") continue;
    RasterName name;
    try {
      name = ParseRasterFilename(path.filename().string());
    } catch (const Error&) {
      continue;
    }
    if (name.probability || std::find(lesions.begin(), lesions.end(), name.lesion) == lesions.end()) {
      continue;
    }
    Job job{path, fs::path(c.pred_dir) / ProbabilityFilename(name.image_id, name.lesion), true,
            name.lesion};
    if (!fs::exists(job.prediction)) {
      job.prediction = fs::path(c.pred_dir) / MaskFilename(name.image_id, name.lesion);
      job.probability = false;
    }
    if (!fs::exists(job.prediction)) {
      Fail(ErrorKind::kJoin, "no prediction for " + path.filename().string() + " in " + c.pred_dir);
    }
    jobs.push_back(std::move(job));
  }

  std::vector<ImageEvaluation> evaluations(jobs.size());
  std::vector<std::pair<int, int>> frames(jobs.size());
  ParallelFor(jobs.size(), c.jobs, [&](std::size_t i) {
    const LesionMask truth = LoadMask(jobs[i].truth.string());
    frames[i] = {truth.width(), truth.height()};
    if (jobs[i].probability) {
      evaluations[i] = EvaluateImage(LoadProbabilityMap(jobs[i].prediction.string()), truth,
                                     c.dice_threshold);
    } else {
      evaluations[i] = EvaluateImage(LoadMask(jobs[i].prediction.string()), truth, c.dice_threshold);
    }
  });

  std::vector<MetricRecord> records;
  for (Lesion lesion : lesions) {
    std::vector<ImageEvaluation> subset;
    for (const auto& e : evaluations) {
      if (e.lesion == lesion) subset.push_back(e);
    }
    if (subset.empty()) {
      err << "warning: no " << LesionCode(lesion) << " masks in " << c.truth_dir << "\n";
      continue;
    }
    for (MetricKind metric : metrics) {
      const DatasetMetricResult result = DatasetMetric(subset, metric, aggregation);
      records.push_back({c.combination, test_dataset, lesion, c.replicate_seed, metric,
                         result.value, result.n_images, result.degenerate_images});
    }
  }
  std::set<std::pair<int, int>> distinct(frames.begin(), frames.end());
  std::string resolution = "# resolution=";
  for (const auto& [w, h] : distinct) resolution += std::to_string(w) + "x" + std::to_string(h) + ";";
  resolution += "\n# aggregation=" + c.aggregation + "\n";
  EnsureParent(c.metrics_out);
  WriteCsvOutput(c, c.metrics_out, MetricRecordsToCsv(records), resolution);
  out << "metrics: " << jobs.size() << " image/lesion pairs, " << records.size() << " records\n";
  return kExitOk;
}

int RunReport(const RunConfig& c, std::ostream& out) {
  const MetricKind metric = ParseMetric(c.report_metric);
  if (c.strategies) {
    if (c.strategy_inputs.empty()) Fail(ErrorKind::kUsage, "--strategies needs --strategy name=path entries");
    std::map<Strategy, std::vector<MetricRecord>> records;
    for (const auto& entry : c.strategy_inputs) {
      const std::size_t eq = entry.find('=');
      if (eq == std::string::npos) Fail(ErrorKind::kUsage, "--strategy expects name=path, got '" + entry + "'");
      const Strategy strategy = ParseStrategy(entry.substr(0, eq));
      auto loaded = MetricRecordsFromCsv(ReadCsvFile(entry.substr(eq + 1)));
      auto& list = records[strategy];
      list.insert(list.end(), loaded.begin(), loaded.end());
    }
    const StrategyComparison comparison = CompareStrategies(records, metric);
    EnsureParent(c.report_out);
    WriteCsvOutput(c, c.report_out, StrategyComparisonToCsv(comparison));
    if (!c.report_json.empty()) {
      EnsureParent(c.report_json);
      WriteJsonOutput(c, c.report_json, StrategyComparisonToJson(comparison));
    }
    out << "report: " << comparison.rows.size() << " combinations compared across "
        << comparison.strategies.size() << " strategies\n";
    return kExitOk;
  }
  if (c.scenario.empty()) Fail(ErrorKind::kUsage, "report needs --scenario <id> or --strategies");
  if (c.report_plan.empty() || c.report_records.empty()) {
    Fail(ErrorKind::kUsage, "scenario reports need --plan and --records");
  }
  json plan_json;
  try {
    plan_json = json::parse(ReadTextFile(c.report_plan));
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kParse, "plan: " + std::string(e.what()));
  }
  const ExperimentPlan plan = PlanFromJson(plan_json);
  std::vector<MetricRecord> records;
  for (const auto& path : c.report_records) {
    auto loaded = MetricRecordsFromCsv(ReadCsvFile(path));
    records.insert(records.end(), loaded.begin(), loaded.end());
  }
  ScenarioOptions options;
  options.metric = metric;
  if (!c.report_lesion.empty()) options.lesion = LesionFromCode(c.report_lesion);
  options.allow_missing = c.allow_missing;
  const ScenarioTable table = BuildScenarioTable(plan, records, c.scenario, options);
  EnsureParent(c.report_out);
  WriteCsvOutput(c, c.report_out, ScenarioToCsv(table));
  if (!c.report_json.empty()) {
    EnsureParent(c.report_json);
    WriteJsonOutput(c, c.report_json, ScenarioToJson(table));
  }
  out << RenderScenario(table);
  return kExitOk;
}

}  // namespace

std::map<std::string, std::vector<std::string>> DeclaredOptions() {
  RunConfig config;
  App app = BuildApp(config);
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [name, sub] : app.subcommands) {
    auto& names = out[name];
    for (const CLI::Option* opt : sub->get_options()) {
      for (const auto& lname : opt->get_lnames()) names.push_back("--" + lname);
      if (opt->get_lnames().empty() && !opt->get_name().empty() && opt->get_name()[0] != '-') {
        names.push_back(opt->get_name());
      }
    }
  }
  return out;
}

int Dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  App app = BuildApp(config);
  std::vector<std::string> storage;
  storage.push_back("seg-genlab");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.root->parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.root->exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* selected = app.root->get_subcommands().front();
  const std::string name = selected->get_name();
  try {
    if (name == "synth") return RunSynth(config, out);
    if (name == "characterize") return RunCharacterize(config, out);
    if (name == "quality") return RunQuality(config, out);
    if (name == "plan") return RunPlan(config, out);
    if (name == "average") return RunAverage(config, out);
    if (name == "ensemble") return RunEnsemble(config, out);
    if (name == "metrics") return RunMetrics(config, out, err);
    if (name == "report") return RunReport(config, out);
  } catch (const Error& e) {
    err << "error: command=" << name << " kind=" << ErrorKindName(e.kind()) << " message=\""
        << OneLine(e.what()) << "\"\n";
    return IsIntegrityError(e.kind()) ? kExitIntegrity : kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: command=" << name << " kind=io message=\"" << OneLine(e.what()) << "\"\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: command=" << name << " kind=internal message=\"" << OneLine(e.what()) << "\"\n";
    return kExitUsage;
  }
  err << "error: kind=usage message=\"unknown subcommand\"\n";
  return kExitUsage;
}

}  // namespace sgl
