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

#include "sgl/experiment_plan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "sgl/error.hpp"
#include "sgl/random.hpp"

namespace sgl {

using nlohmann::json;

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  Fail(ErrorKind::kParse, "unknown split '" + std::string(text) + "'");
}

std::string_view StyleTagName(StyleTag style) {
  switch (style) {
    case StyleTag::kFine: return "fine";
    case StyleTag::kCoarse: return "coarse";
    case StyleTag::kMixed: return "mixed";
  }
  return "?";
}

StyleTag ParseStyleTag(std::string_view text) {
  if (text == "fine") return StyleTag::kFine;
  if (text == "coarse") return StyleTag::kCoarse;
  if (text == "mixed") return StyleTag::kMixed;
  Fail(ErrorKind::kParse, "unknown style tag '" + std::string(text) + "'");
}

void ValidateManifest(const DatasetManifest& manifest) {
  if (manifest.dataset_id.empty()) Fail(ErrorKind::kValidation, "manifest needs a dataset_id");
  if (manifest.dataset_id.find('+') != std::string::npos) {
    Fail(ErrorKind::kValidation, "dataset id '" + manifest.dataset_id + "' must not contain '+'");
  }
  std::set<std::string> ids;
  for (const auto& image : manifest.images) {
    if (image.image_id.empty()) Fail(ErrorKind::kValidation, "empty image_id");
    if (!ids.insert(image.image_id).second) {
      Fail(ErrorKind::kValidation, "duplicate image_id '" + image.image_id + "' in " +
                                       manifest.dataset_id);
    }
    if (manifest.split.provided && !image.split) {
      Fail(ErrorKind::kValidation, "image '" + image.image_id + "' of " + manifest.dataset_id +
                                       " has no provided split");
    }
  }
  const auto& s = manifest.split;
  if (!s.provided && !(s.test_ratio >= 0.0 && s.test_ratio < 1.0 && s.val_ratio >= 0.0 &&
                       s.val_ratio < 1.0)) {
    Fail(ErrorKind::kValidation, "split ratios must lie in [0, 1)");
  }
}

DatasetManifest ManifestFromJson(const json& j) {
  DatasetManifest m;
  try {
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.style = ParseStyleTag(j.at("style").get<std::string>());
    for (const auto& code : j.value("lesions", json::array())) {
      m.lesions.push_back(LesionFromCode(code.get<std::string>()));
    }
    const json split = j.value("split", json{{"mode", "provided"}});
    const std::string mode = split.at("mode").get<std::string>();
    if (mode == "provided") {
      m.split.provided = true;
    } else if (mode == "generated") {
      m.split.seed = split.value("seed", std::uint64_t{0});
      m.split.test_ratio = split.value("test_ratio", kDefaultTestRatio);
      m.split.val_ratio = split.value("val_ratio", kDefaultValRatio);
    } else {
      Fail(ErrorKind::kParse, "split mode must be 'provided' or 'generated'");
    }
    if (j.contains("resolution")) {
      const auto& r = j.at("resolution");
      m.resolution = std::make_pair(r.at(0).get<int>(), r.at(1).get<int>());
    }
    for (const auto& item : j.at("images")) {
      ImageRecord image;
      image.image_id = item.at("image_id").get<std::string>();
      if (item.contains("split")) image.split = ParseSplit(item.at("split").get<std::string>());
      if (item.contains("paths")) {
        image.paths = item.at("paths").get<std::map<std::string, std::string>>();
      }
      m.images.push_back(std::move(image));
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, std::string("manifest: ") + e.what());
  }
  ValidateManifest(m);
  return m;
}

json ManifestToJson(const DatasetManifest& m) {
  json j;
  j["dataset_id"] = m.dataset_id;
  j["style"] = StyleTagName(m.style);
  json lesions = json::array();
  for (Lesion l : m.lesions) lesions.push_back(LesionCode(l));
  j["lesions"] = lesions;
  if (m.split.provided) {
    j["split"] = {{"mode", "provided"}};
  } else {
    j["split"] = {{"mode", "generated"},
                  {"seed", m.split.seed},
                  {"test_ratio", m.split.test_ratio},
                  {"val_ratio", m.split.val_ratio}};
  }
  if (m.resolution) j["resolution"] = {m.resolution->first, m.resolution->second};
  json images = json::array();
  for (const auto& image : m.images) {
    json item = {{"image_id", image.image_id}};
    if (image.split) item["split"] = SplitName(*image.split);
    if (!image.paths.empty()) item["paths"] = image.paths;
    images.push_back(std::move(item));
  }
  j["images"] = images;
  return j;
}

DatasetManifest LoadManifest(const std::string& path) {
  json j;
  try {
    j = json::parse(ReadTextFile(path));
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kParse, "manifest '" + path + "': " + e.what());
  }
  return ManifestFromJson(j);
}

SplitCounts CountSplit(const SplitAssignment& assignment) {
  SplitCounts counts;
  for (const auto& [id, split] : assignment) {
    switch (split) {
      case Split::kTrain: ++counts.train; break;
      case Split::kVal: ++counts.val; break;
      case Split::kTest: ++counts.test; break;
    }
  }
  return counts;
}

namespace {

// Half-up rounding; the epsilon keeps products such as 0.3 * 5 on the
// intended side of .5.
std::size_t RoundHalfUp(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace

SplitAssignment GenerateSplit(const DatasetManifest& manifest, std::uint64_t seed,
                              double test_ratio, double val_ratio) {
  SplitAssignment assignment;
  if (manifest.split.provided) {
    for (const auto& image : manifest.images) {
      if (!image.split) {
        Fail(ErrorKind::kValidation, "image '" + image.image_id + "' has no provided split");
      }
      assignment[image.image_id] = *image.split;
    }
    return assignment;
  }
  const std::size_t n = manifest.images.size();
  if (n < 3) {
    Fail(ErrorKind::kSize, "dataset " + manifest.dataset_id + " has " + std::to_string(n) +
                               " images; a generated split needs at least 3");
  }
  if (!(test_ratio >= 0.0 && test_ratio < 1.0 && val_ratio >= 0.0 && val_ratio < 1.0)) {
    Fail(ErrorKind::kValidation, "split ratios must lie in [0, 1)");
  }
  std::vector<std::string> ids;
  for (const auto& image : manifest.images) ids.push_back(image.image_id);
  std::sort(ids.begin(), ids.end());
  Xoshiro256 rng(seed);
  rng.Shuffle(std::span<std::string>(ids));

  const std::size_t n_test = std::min(n, RoundHalfUp(test_ratio * static_cast<double>(n)));
  const std::size_t n_val =
      std::min(n - n_test, RoundHalfUp(val_ratio * static_cast<double>(n - n_test)));
  for (std::size_t i = 0; i < n; ++i) {
    assignment[ids[i]] = i < n_test ? Split::kTest : i < n_test + n_val ? Split::kVal : Split::kTrain;
  }
  return assignment;
}

SplitAssignment ResolveSplit(const DatasetManifest& manifest) {
  return GenerateSplit(manifest, manifest.split.seed, manifest.split.test_ratio,
                       manifest.split.val_ratio);
}

std::string CombinationId(std::vector<std::string> members) {
  std::sort(members.begin(), members.end());
  std::string id;
  for (const auto& m : members) id += (id.empty() ? "" : "+") + m;
  return id;
}

StyleTag CombinedStyle(std::span<const StyleTag> styles) {
  if (styles.empty()) return StyleTag::kMixed;
  const bool all_fine = std::all_of(styles.begin(), styles.end(),
                                    [](StyleTag s) { return s == StyleTag::kFine; });
  const bool all_coarse = std::all_of(styles.begin(), styles.end(),
                                      [](StyleTag s) { return s == StyleTag::kCoarse; });
  return all_fine ? StyleTag::kFine : all_coarse ? StyleTag::kCoarse : StyleTag::kMixed;
}

std::vector<ComboSpec> EnumerateCombinations(std::span<const DatasetInfo> datasets,
                                             const std::set<std::string>& held_out) {
  std::set<std::string> known;
  for (const auto& d : datasets) {
    if (d.dataset_id.empty() || d.dataset_id.find('+') != std::string::npos) {
      Fail(ErrorKind::kValidation, "invalid dataset id '" + d.dataset_id + "'");
    }
    if (!known.insert(d.dataset_id).second) {
      Fail(ErrorKind::kValidation, "duplicate dataset id '" + d.dataset_id + "'");
    }
  }
  for (const auto& id : held_out) {
    if (!known.contains(id)) Fail(ErrorKind::kValidation, "held-out dataset '" + id + "' is unknown");
  }
  std::vector<DatasetInfo> pool;
  for (const auto& d : datasets) {
    if (!held_out.contains(d.dataset_id)) pool.push_back(d);
  }
  if (pool.empty()) Fail(ErrorKind::kArity, "no datasets left after removing held-out sets");
  if (pool.size() > 20) Fail(ErrorKind::kSize, "too many datasets to enumerate combinations");
  std::sort(pool.begin(), pool.end(), [](const DatasetInfo& a, const DatasetInfo& b) {
    return a.dataset_id < b.dataset_id;
  });

  std::vector<ComboSpec> combos;
  const std::uint64_t limit = std::uint64_t{1} << pool.size();
  for (std::uint64_t mask = 1; mask < limit; ++mask) {
    ComboSpec combo;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!(mask & (std::uint64_t{1} << i))) continue;
      combo.members.push_back(pool[i].dataset_id);
      combo.style_composition.push_back(pool[i].style);
      combo.total_training_images += pool[i].n_train;
    }
    combo.combination_id = CombinationId(combo.members);
    combo.style = CombinedStyle(combo.style_composition);
    combos.push_back(std::move(combo));
  }
  std::sort(combos.begin(), combos.end(), [](const ComboSpec& a, const ComboSpec& b) {
    return std::tie(a.total_training_images, a.combination_id) <
           std::tie(b.total_training_images, b.combination_id);
  });
  return combos;
}

ExperimentPlan BuildPlan(std::span<const DatasetManifest> manifests,
                         const std::set<std::string>& held_out,
                         std::vector<std::int64_t> replicate_seeds, std::string replicate_label) {
  ExperimentPlan plan;
  plan.held_out = held_out;
  plan.replicate_seeds = std::move(replicate_seeds);
  plan.replicate_label = std::move(replicate_label);
  std::vector<DatasetInfo> infos;
  for (const auto& manifest : manifests) {
    ValidateManifest(manifest);
    PlannedDataset d;
    d.assignment = ResolveSplit(manifest);
    const SplitCounts counts = CountSplit(d.assignment);
    d.info = {manifest.dataset_id, manifest.style, counts.train};
    d.n_images = manifest.images.size();
    d.n_val = counts.val;
    d.n_test = counts.test;
    d.provided_split = manifest.split.provided;
    d.split_seed = manifest.split.seed;
    infos.push_back(d.info);
    plan.datasets.push_back(std::move(d));
  }
  std::sort(plan.datasets.begin(), plan.datasets.end(),
            [](const PlannedDataset& a, const PlannedDataset& b) {
              return a.info.dataset_id < b.info.dataset_id;
            });
  plan.combinations = EnumerateCombinations(infos, held_out);
  return plan;
}

json PlanToJson(const ExperimentPlan& plan) {
  json datasets = json::array();
  for (const auto& d : plan.datasets) {
    json assignment = json::object();
    for (const auto& [id, split] : d.assignment) assignment[id] = SplitName(split);
    json entry = {{"dataset_id", d.info.dataset_id},
                  {"style", StyleTagName(d.info.style)},
                  {"n_images", d.n_images},
                  {"n_train", d.info.n_train},
                  {"n_val", d.n_val},
                  {"n_test", d.n_test},
                  {"split_mode", d.provided_split ? "provided" : "generated"},
                  {"assignment", assignment}};
    if (!d.provided_split) entry["split_seed"] = d.split_seed;
    datasets.push_back(std::move(entry));
  }
  json combos = json::array();
  for (const auto& c : plan.combinations) {
    json styles = json::array();
    for (StyleTag s : c.style_composition) styles.push_back(StyleTagName(s));
    combos.push_back({{"combination_id", c.combination_id},
                      {"members", c.members},
                      {"total_training_images", c.total_training_images},
                      {"style_composition", styles},
                      {"style", StyleTagName(c.style)}});
  }
  return {{"datasets", datasets},
          {"combinations", combos},
          {"held_out", plan.held_out},
          {"replicate_label", plan.replicate_label},
          {"replicate_seeds", plan.replicate_seeds}};
}

ExperimentPlan PlanFromJson(const json& j) {
  ExperimentPlan plan;
  try {
    for (const auto& d : j.at("datasets")) {
      PlannedDataset pd;
      pd.info.dataset_id = d.at("dataset_id").get<std::string>();
      pd.info.style = ParseStyleTag(d.at("style").get<std::string>());
      pd.info.n_train = d.at("n_train").get<std::size_t>();
      pd.n_images = d.at("n_images").get<std::size_t>();
      pd.n_val = d.at("n_val").get<std::size_t>();
      pd.n_test = d.at("n_test").get<std::size_t>();
      pd.provided_split = d.at("split_mode").get<std::string>() == "provided";
      pd.split_seed = d.value("split_seed", std::uint64_t{0});
      for (const auto& [id, split] : d.at("assignment").items()) {
        pd.assignment[id] = ParseSplit(split.get<std::string>());
      }
      plan.datasets.push_back(std::move(pd));
    }
    plan.held_out = j.at("held_out").get<std::set<std::string>>();
    plan.replicate_label = j.value("replicate_label", std::string("seed"));
    plan.replicate_seeds = j.at("replicate_seeds").get<std::vector<std::int64_t>>();
    for (const auto& c : j.at("combinations")) {
      ComboSpec combo;
      combo.combination_id = c.at("combination_id").get<std::string>();
      combo.members = c.at("members").get<std::vector<std::string>>();
      combo.total_training_images = c.at("total_training_images").get<std::size_t>();
      for (const auto& s : c.at("style_composition")) {
        combo.style_composition.push_back(ParseStyleTag(s.get<std::string>()));
      }
      combo.style = ParseStyleTag(c.at("style").get<std::string>());
      if (combo.members.empty() || CombinationId(combo.members) != combo.combination_id) {
        Fail(ErrorKind::kParse, "combination '" + combo.combination_id +
                                    "' does not match its members");
      }
      for (const auto& m : combo.members) {
        if (plan.held_out.contains(m)) {
          Fail(ErrorKind::kParse, "combination '" + combo.combination_id +
                                      "' trains on held-out dataset " + m);
        }
      }
      plan.combinations.push_back(std::move(combo));
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, std::string("plan: ") + e.what());
  }
  return plan;
}

namespace {

bool Contains(const std::vector<std::string>& members, const std::string& id) {
  return std::find(members.begin(), members.end(), id) != members.end();
}

}  // namespace

ScenarioTable BuildScenarioTable(const ExperimentPlan& plan, std::span<const MetricRecord> records,
                                 const std::string& test_dataset, const ScenarioOptions& options) {
  ScenarioTable table;
  table.test_dataset = test_dataset;
  table.metric = options.metric;

  // (combination, seed) -> values over lesions
  std::map<std::string, std::map<std::int64_t, std::vector<double>>> cells;
  for (const auto& r : records) {
    if (r.test_dataset != test_dataset || r.metric != options.metric) continue;
    if (options.lesion && r.lesion != *options.lesion) continue;
    cells[r.combination_id][r.replicate_seed].push_back(r.value);
  }

  std::vector<const ComboSpec*> combos;
  for (const auto& c : plan.combinations) {
    if (!Contains(c.members, test_dataset)) combos.push_back(&c);
  }
  std::sort(combos.begin(), combos.end(), [](const ComboSpec* a, const ComboSpec* b) {
    return std::tie(a->total_training_images, a->combination_id) <
           std::tie(b->total_training_images, b->combination_id);
  });

  std::vector<std::string> missing;
  for (const ComboSpec* c : combos) {
    ScenarioRow row;
    row.combination_id = c->combination_id;
    row.total_training_images = c->total_training_images;
    row.style = c->style;
    auto it = cells.find(c->combination_id);
    if (it == cells.end()) {
      row.missing = true;
      missing.push_back(c->combination_id + "/" + test_dataset);
    } else {
      std::vector<double> per_seed;
      for (const auto& [seed, values] : it->second) {
        double sum = 0.0;
        for (double v : values) sum += v;
        per_seed.push_back(sum / static_cast<double>(values.size()));
      }
      row.summary = Summarize(per_seed);
    }
    table.rows.push_back(std::move(row));
  }
  if (!missing.empty() && !options.allow_missing) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    Fail(ErrorKind::kJoin, "no " + std::string(MetricName(options.metric)) +
                               " records for cells: " + list);
  }

  ScenarioRow* best = nullptr;
  ScenarioRow* worst = nullptr;
  for (auto& row : table.rows) {
    if (row.missing) continue;
    if (!best || row.summary.mean > best->summary.mean) best = &row;
    if (!worst || row.summary.mean < worst->summary.mean) worst = &row;
  }
  if (best) best->best = true;
  if (worst && worst != best) worst->worst = true;
  return table;
}

CsvTable ScenarioToCsv(const ScenarioTable& table) {
  CsvTable csv;
  csv.header = {"test_dataset", "combination_id", "total_training_images", "style", "metric",
                "n_replicates", "mean", "min", "max", "stddev", "mark"};
  for (const auto& row : table.rows) {
    const std::string mark = row.missing ? "missing" : row.best ? "best" : row.worst ? "worst" : "";
    auto number = [&](double v) { return row.missing ? std::string() : FormatDouble(v); };
    csv.rows.push_back({table.test_dataset, row.combination_id,
                        std::to_string(row.total_training_images),
                        std::string(StyleTagName(row.style)),
                        std::string(MetricName(table.metric)), std::to_string(row.summary.n),
                        number(row.summary.mean), number(row.summary.min),
                        number(row.summary.max), number(row.summary.stddev), mark});
  }
  return csv;
}

json ScenarioToJson(const ScenarioTable& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = {{"combination_id", row.combination_id},
              {"total_training_images", row.total_training_images},
              {"style", StyleTagName(row.style)},
              {"missing", row.missing},
              {"best", row.best},
              {"worst", row.worst}};
    if (!row.missing) {
      r["n_replicates"] = row.summary.n;
      r["mean"] = row.summary.mean;
      r["min"] = row.summary.min;
      r["max"] = row.summary.max;
      r["stddev"] = row.summary.stddev;
    }
    rows.push_back(std::move(r));
  }
  return {{"test_dataset", table.test_dataset},
          {"metric", MetricName(table.metric)},
          {"rows", rows}};
}

std::string RenderScenario(const ScenarioTable& table) {
  std::size_t id_width = std::string_view("combination").size();
  for (const auto& row : table.rows) id_width = std::max(id_width, row.combination_id.size());
  auto pad = [](std::string text, std::size_t width) {
    text.resize(std::max(width, text.size()), ' ');
    return text;
  };
  auto fixed = [](double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3f", v);
    return std::string(buffer);
  };
  std::string out = table.test_dataset + " (" + std::string(MetricName(table.metric)) + ")\n";
  out += pad("combination", id_width) + "  " + pad("images", 8) + pad("style", 8) + "mean\n";
  for (const auto& row : table.rows) {
    out += pad(row.combination_id, id_width) + "  " +
           pad(std::to_string(row.total_training_images), 8) +
           pad(std::string(StyleTagName(row.style)), 8);
    if (row.missing) {
      out += "-";
    } else {
      out += fixed(row.summary.mean);
      if (row.summary.n > 1) out += " +/- " + fixed(row.summary.stddev);
      if (row.best) out += "*";
    }
    out += "\n";
  }
  return out;
}

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kBaseline: return "baseline";
    case Strategy::kEnsemble: return "ensemble";
    case Strategy::kSwaEncoder: return "swa_encoder";
    case Strategy::kSwaDecoder: return "swa_decoder";
    case Strategy::kSwaFull: return "swa_full";
    case Strategy::kSoupEncoder: return "soup_encoder";
    case Strategy::kSoupDecoder: return "soup_decoder";
    case Strategy::kSoupFull: return "soup_full";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view text) {
  for (Strategy s : {Strategy::kBaseline, Strategy::kEnsemble, Strategy::kSwaEncoder,
                     Strategy::kSwaDecoder, Strategy::kSwaFull, Strategy::kSoupEncoder,
                     Strategy::kSoupDecoder, Strategy::kSoupFull}) {
    if (StrategyName(s) == text) return s;
  }
  Fail(ErrorKind::kValidation, "unknown strategy '" + std::string(text) + "'");
}

StrategyComparison CompareStrategies(const std::map<Strategy, std::vector<MetricRecord>>& records,
                                     MetricKind metric) {
  if (!records.contains(Strategy::kBaseline)) {
    Fail(ErrorKind::kJoin, "strategy comparison needs baseline records");
  }
  StrategyComparison out;
  out.metric = metric;

  // strategy -> combination -> test set -> values
  std::map<Strategy, std::map<std::string, std::map<std::string, std::vector<double>>>> grouped;
  for (const auto& [strategy, list] : records) {
    out.strategies.push_back(strategy);
    auto& by_combo = grouped[strategy];
    for (const auto& r : list) {
      if (r.metric == metric) by_combo[r.combination_id][r.test_dataset].push_back(r.value);
    }
  }

  const auto& reference = grouped.at(Strategy::kBaseline);
  for (const auto& [strategy, by_combo] : grouped) {
    std::vector<std::string> problems;
    for (const auto& [combo, tests] : reference) {
      if (!by_combo.contains(combo)) problems.push_back(combo);
    }
    for (const auto& [combo, tests] : by_combo) {
      if (!reference.contains(combo)) problems.push_back(combo);
    }
    if (!problems.empty()) {
      std::string list;
      for (const auto& p : problems) list += (list.empty() ? "" : ", ") + p;
      Fail(ErrorKind::kJoin, "strategy " + std::string(StrategyName(strategy)) +
                                 " and baseline cover different combinations: " + list);
    }
  }
  if (reference.empty()) Fail(ErrorKind::kJoin, "no baseline records for the chosen metric");

  for (const auto& [combo, unused] : reference) {
    StrategyRow row;
    row.combination_id = combo;
    for (const auto& [strategy, by_combo] : grouped) {
      double across_tests = 0.0;
      const auto& tests = by_combo.at(combo);
      for (const auto& [test, values] : tests) {
        double sum = 0.0;
        for (double v : values) sum += v;
        across_tests += sum / static_cast<double>(values.size());
      }
      row.score[strategy] = across_tests / static_cast<double>(tests.size());
    }
    const double baseline = row.score.at(Strategy::kBaseline);
    for (const auto& [strategy, score] : row.score) {
      if (strategy != Strategy::kBaseline && score > baseline) row.beats_baseline.insert(strategy);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

CsvTable StrategyComparisonToCsv(const StrategyComparison& comparison) {
  CsvTable csv;
  csv.header = {"combination_id", "strategy", "metric", "score", "beats_baseline"};
  for (const auto& row : comparison.rows) {
    for (const auto& [strategy, score] : row.score) {
      csv.rows.push_back({row.combination_id, std::string(StrategyName(strategy)),
                          std::string(MetricName(comparison.metric)), FormatDouble(score),
                          row.beats_baseline.contains(strategy) ? "1" : "0"});
    }
  }
  return csv;
}

json StrategyComparisonToJson(const StrategyComparison& comparison) {
  json rows = json::array();
  for (const auto& row : comparison.rows) {
    json scores = json::object();
    json beats = json::array();
    for (const auto& [strategy, score] : row.score) scores[std::string(StrategyName(strategy))] = score;
    for (Strategy s : row.beats_baseline) beats.push_back(StrategyName(s));
    rows.push_back({{"combination_id", row.combination_id}, {"score", scores}, {"beats_baseline", beats}});
  }
  return {{"metric", MetricName(comparison.metric)}, {"rows", rows}};
}

}  // namespace sgl
