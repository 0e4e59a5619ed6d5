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

#include <gtest/gtest.h>

#include <sstream>

#include "archive_fixtures.hpp"
#include "oracles.hpp"
#include "sgl/csv.hpp"
#include "sgl/experiment_plan.hpp"
#include "sgl/metrics.hpp"

namespace sgl {
namespace {

using testing::ScratchDir;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = Dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

void WriteManifest(const std::filesystem::path& dir, const std::string& id, std::size_t n,
                   const std::string& style) {
  DatasetManifest m;
  m.dataset_id = id;
  m.style = ParseStyleTag(style);
  m.lesions = {Lesion::kEX};
  m.split.seed = 1;
  for (std::size_t i = 0; i < n; ++i) m.images.push_back({id + std::to_string(i), {}, {}});
  WriteTextFile((dir / (id + ".json")).string(), ManifestToJson(m).dump(2));
}

std::string WriteSynthConfig(const ScratchDir& dir, const std::string& id, double quality) {
  const nlohmann::json j = {{"dataset_id", id},
                            {"seed", 12},
                            {"n_images", 4},
                            {"width", 40},
                            {"height", 40},
                            {"quality", quality},
                            {"lesions", {{{"lesion", "EX"}, {"count_mean", 4}, {"area_mean", 12}},
                                         {{"lesion", "HE"}, {"count_mean", 2}, {"area_mean", 20}}}}};
  const std::string path = dir.str(id + ".json");
  WriteTextFile(path, j.dump());
  return path;
}

TEST(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"plan", "--no-such-flag"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"average", "--mode", "blend", "--scope", "full", "--out", "x"}).code, kExitUsage);
}

TEST(CliTest, HelpExitsZero) {
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(Invoke({"--version"}).code, kExitOk);
}

TEST(CliTest, HelpListsEveryDeclaredOption) {
  const auto declared = DeclaredOptions();
  EXPECT_EQ(declared.size(), 8u);
  for (const auto& [sub, options] : declared) {
    const Outcome r = Invoke({sub, "--help"});
    EXPECT_EQ(r.code, kExitOk) << sub;
    const std::string text = r.out + r.err;
    for (const auto& option : options) {
      EXPECT_NE(text.find(option), std::string::npos) << sub << " " << option;
    }
  }
}

TEST(CliTest, PlanEnumeratesAndIsIdempotent) {
  ScratchDir dir("cli");
  std::filesystem::create_directories(dir.path() / "manifests");
  WriteManifest(dir.path() / "manifests", "IDR", 81, "fine");
  WriteManifest(dir.path() / "manifests", "DDR", 60, "fine");
  WriteManifest(dir.path() / "manifests", "FGA", 90, "coarse");
  WriteManifest(dir.path() / "manifests", "RET", 70, "coarse");
  WriteManifest(dir.path() / "manifests", "MES", 200, "fine");
  const std::string manifests = dir.str("manifests");
  ASSERT_EQ(Invoke({"plan", "--datasets", manifests, "--out", dir.str("a.json")}).code, kExitOk);
  ASSERT_EQ(Invoke({"plan", "--datasets", manifests, "--out", dir.str("b.json"), "--jobs", "4"}).code,
            kExitOk);
  const std::string a = ReadTextFile(dir.str("a.json"));
  EXPECT_EQ(a, ReadTextFile(dir.str("b.json")));
  const ExperimentPlan plan = PlanFromJson(nlohmann::json::parse(a));
  EXPECT_EQ(plan.combinations.size(), 31u);
  EXPECT_EQ(plan.replicate_seeds.size(), 8u);

  ASSERT_EQ(Invoke({"plan", "--datasets", manifests, "--out", dir.str("c.json"), "--hold-out", "IDR",
                    "--seeds", "3,5"})
                .code,
            kExitOk);
  const ExperimentPlan held = PlanFromJson(nlohmann::json::parse(ReadTextFile(dir.str("c.json"))));
  EXPECT_EQ(held.combinations.size(), 15u);
  EXPECT_EQ(held.replicate_seeds, (std::vector<std::int64_t>{3, 5}));
  EXPECT_EQ(Invoke({"plan", "--datasets", manifests, "--out", dir.str("d.json"), "--seeds", "1",
                    "--replicates", "2"})
                .code,
            kExitUsage);
}

TEST(CliTest, CorruptArchiveExitsTwo) {
  ScratchDir dir("cli");
  const std::string bytes = SerializeArchive(testing::RandomArchive(1, 2));
  WriteTextFile(dir.str("good.sglb"), bytes);
  WriteTextFile(dir.str("bad.sglb"), testing::RewriteManifest(bytes, [](nlohmann::json& m) {
                  for (auto& [name, entry] : m["tensors"].items()) entry["offset"] = 2;
                }));
  const Outcome ok = Invoke({"average", "--mode", "soup", "--scope", "full", "--out", dir.str("o.sglb"),
                         dir.str("good.sglb")});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_EQ(ReadArchive(dir.str("o.sglb")).tensors, ReadArchive(dir.str("good.sglb")).tensors);
  const Outcome bad = Invoke({"average", "--mode", "soup", "--scope", "full", "--out", dir.str("o2.sglb"),
                          dir.str("bad.sglb")});
  EXPECT_EQ(bad.code, kExitIntegrity);
  EXPECT_NE(bad.err.find("kind=integrity"), std::string::npos) << bad.err;
}

TEST(CliTest, SynthMetricsEnsembleCharacterize) {
  ScratchDir dir("cli");
  const std::string config = WriteSynthConfig(dir, "SYN", 0.8);
  ASSERT_EQ(Invoke({"synth", "--config", config, "--out", dir.str("syn")}).code, kExitOk);

  const Outcome m = Invoke({"metrics", "--pred", dir.str("syn/pred"), "--truth", dir.str("syn/masks"),
                        "--lesions", "EX,HE", "--out", dir.str("m.csv"), "--combination", "A",
                        "--test-dataset", "SYN", "--seed", "2"});
  ASSERT_EQ(m.code, kExitOk) << m.err;
  const auto records = MetricRecordsFromCsv(ReadCsvFile(dir.str("m.csv")));
  ASSERT_EQ(records.size(), 4u);
  for (const auto& r : records) {
    EXPECT_EQ(r.combination_id, "A");
    EXPECT_EQ(r.replicate_seed, 2);
    EXPECT_EQ(r.n_images, 4u);
    EXPECT_GT(r.value, 0.0);
  }
  ASSERT_EQ(Invoke({"metrics", "--pred", dir.str("syn/pred"), "--truth", dir.str("syn/masks"),
                    "--lesions", "EX,HE", "--out", dir.str("m2.csv"), "--combination", "A",
                    "--test-dataset", "SYN", "--seed", "2", "--jobs", "3"})
                .code,
            kExitOk);
  EXPECT_EQ(ReadTextFile(dir.str("m.csv")), ReadTextFile(dir.str("m2.csv")));

  // Ensembling a directory with itself reproduces it.
  ASSERT_EQ(Invoke({"ensemble", "--out", dir.str("ens"), dir.str("syn/pred"), dir.str("syn/pred")}).code,
            kExitOk);
  EXPECT_EQ(ReadTextFile(dir.str("ens/SYN_0001.EX.prob.png")),
            ReadTextFile(dir.str("syn/pred/SYN_0001.EX.prob.png")));

  const Outcome c = Invoke({"characterize", "--masks", dir.str("syn/masks"), "--lesion", "EX", "--out",
                        dir.str("stats.csv"), "--hist", dir.str("hist.csv"), "--summary",
                        dir.str("summary.json")});
  ASSERT_EQ(c.code, kExitOk) << c.err;
  EXPECT_EQ(ReadCsvFile(dir.str("stats.csv")).rows.size(), 4u);
  const auto summary = nlohmann::json::parse(ReadTextFile(dir.str("summary.json")));
  EXPECT_EQ(summary["n_images"], 4);

  std::filesystem::remove(dir.path() / "syn" / "pred" / "SYN_0002.HE.prob.png");
  const Outcome missing = Invoke({"metrics", "--pred", dir.str("syn/pred"), "--truth", dir.str("syn/masks"),
                              "--out", dir.str("m3.csv")});
  EXPECT_EQ(missing.code, kExitIntegrity);
  EXPECT_NE(missing.err.find("kind=join"), std::string::npos);
}

TEST(CliTest, MetaFooterOnlyWhenAsked) {
  ScratchDir dir("cli");
  WriteTextFile(dir.str("g.csv"), "image_id,grade\na,Good\nb,Reject\n");
  ASSERT_EQ(Invoke({"quality", "--grades", dir.str("g.csv"), "--out", dir.str("q.csv")}).code, kExitOk);
  const std::string plain = ReadTextFile(dir.str("q.csv"));
  EXPECT_EQ(plain.find('#'), std::string::npos);
  EXPECT_NE(plain.find("Good,0.5,2"), std::string::npos) << plain;
  ASSERT_EQ(Invoke({"--meta", "quality", "--grades", dir.str("g.csv"), "--out", dir.str("q2.csv")}).code,
            kExitOk);
  const std::string meta = ReadTextFile(dir.str("q2.csv"));
  EXPECT_NE(meta.find("# generated-by=seg-genlab"), std::string::npos);
  // The footer is comment-only, so the table still parses identically.
  EXPECT_EQ(ReadCsvFile(dir.str("q2.csv")).rows, ReadCsvFile(dir.str("q.csv")).rows);

  WriteTextFile(dir.str("bad.csv"), "image_id,grade\na,OK\n");
  const Outcome bad = Invoke({"quality", "--grades", dir.str("bad.csv"), "--out", dir.str("q3.csv")});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("kind=parse"), std::string::npos);
}

TEST(CliTest, ScenarioAndStrategyReports) {
  ScratchDir dir("cli");
  std::filesystem::create_directories(dir.path() / "manifests");
  WriteManifest(dir.path() / "manifests", "A", 20, "fine");
  WriteManifest(dir.path() / "manifests", "B", 30, "coarse");
  WriteManifest(dir.path() / "manifests", "T", 10, "fine");
  ASSERT_EQ(Invoke({"plan", "--datasets", dir.str("manifests"), "--out", dir.str("plan.json"),
                    "--hold-out", "T", "--replicates", "2"})
                .code,
            kExitOk);
  std::vector<MetricRecord> records;
  const std::map<std::string, double> score = {{"A", 0.6}, {"B", 0.3}, {"A+B", 0.5}};
  for (const auto& [combo, v] : score) {
    for (std::int64_t seed : {0, 1}) {
      records.push_back({combo, "T", Lesion::kEX, seed, MetricKind::kDice, v + 0.01 * seed, 3, 0});
    }
  }
  WriteTextFile(dir.str("r.csv"), ToCsv(MetricRecordsToCsv(records)));
  const Outcome r = Invoke({"report", "--plan", dir.str("plan.json"), "--records", dir.str("r.csv"),
                        "--scenario", "T", "--out", dir.str("s.csv"), "--json", dir.str("s.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("0.605 +/- 0.007*"), std::string::npos) << r.out;
  const CsvTable table = ReadCsvFile(dir.str("s.csv"));
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_EQ(table.rows[0][table.Column("combination_id")], "A");
  EXPECT_EQ(table.rows[0][table.Column("mark")], "best");

  std::vector<MetricRecord> partial(records.begin(), records.begin() + 2);
  WriteTextFile(dir.str("partial.csv"), ToCsv(MetricRecordsToCsv(partial)));
  EXPECT_EQ(Invoke({"report", "--plan", dir.str("plan.json"), "--records", dir.str("partial.csv"),
                    "--scenario", "T", "--out", dir.str("p.csv")})
                .code,
            kExitIntegrity);
  EXPECT_EQ(Invoke({"report", "--plan", dir.str("plan.json"), "--records", dir.str("partial.csv"),
                    "--scenario", "T", "--allow-missing", "--out", dir.str("p.csv")})
                .code,
            kExitOk);

  const Outcome s = Invoke({"report", "--strategies", "--strategy", "baseline=" + dir.str("r.csv"),
                        "--strategy", "ensemble=" + dir.str("r.csv"), "--out", dir.str("cmp.csv")});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  EXPECT_EQ(ReadCsvFile(dir.str("cmp.csv")).rows.size(), 6u);
}

}  // namespace
}  // namespace sgl
