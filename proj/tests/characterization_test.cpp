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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgl/error.hpp"
#include "sgl/synth.hpp"

namespace sgl {
namespace {

using testing::MakeMask;
using testing::OracleComponentAreas;
using testing::RandomMask;
using testing::ToPlain;

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kUsage;
}

std::vector<std::int64_t> SortedAreas(const MaskRaster& m, Connectivity c) {
  auto areas = ComponentAreas(m, c);
  std::sort(areas.begin(), areas.end());
  return areas;
}

TEST(ComponentsTest, TwoBlobs) {
  MaskRaster m = MaskRaster::Zero(6, 10);
  m.block(0, 0, 1, 3).setConstant(true);
  m.block(3, 5, 1, 5).setConstant(true);
  EXPECT_EQ(ComponentAreas(m), (std::vector<std::int64_t>{3, 5}));
  const LesionStats s = ComputeLesionStats(MakeMask(m));
  EXPECT_EQ(s.lesion_count, 2);
  EXPECT_EQ(s.mean_area, 4.0);
  EXPECT_EQ(s.total_area, 8);
}

TEST(ComponentsTest, DiagonalAdjacency) {
  MaskRaster m = MaskRaster::Zero(2, 2);
  m(0, 0) = true;
  m(1, 1) = true;
  EXPECT_EQ(ComponentAreas(m, Connectivity::kEight), (std::vector<std::int64_t>{2}));
  EXPECT_EQ(ComponentAreas(m, Connectivity::kFour), (std::vector<std::int64_t>{1, 1}));
}

TEST(ComponentsTest, OrderedByFirstPixel) {
  MaskRaster m = MaskRaster::Zero(5, 5);
  m(0, 4) = true;
  m(1, 0) = true;
  m(2, 0) = true;
  const auto comps = ConnectedComponents(m);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0].first_x, 4);
  EXPECT_EQ(comps[0].first_y, 0);
  EXPECT_EQ(comps[1].area, 2);
}

TEST(ComponentsTest, MatchesFloodFill) {
  Xoshiro256 rng(51);
  for (int i = 0; i < 100; ++i) {
    const MaskRaster m = RandomMask(rng, 64, 64, rng.Uniform(0.05, 0.6));
    const auto plain = ToPlain(m);
    const auto four = SortedAreas(m, Connectivity::kFour);
    const auto eight = SortedAreas(m, Connectivity::kEight);
    ASSERT_EQ(four, OracleComponentAreas(plain, false));
    ASSERT_EQ(eight, OracleComponentAreas(plain, true));
    EXPECT_GE(four.size(), eight.size());
  }
}

TEST(LesionStatsTest, EmptyAndSquare) {
  const LesionStats empty = ComputeLesionStats(MakeMask(MaskRaster::Zero(8, 8)));
  EXPECT_EQ(empty.lesion_count, 0);
  EXPECT_FALSE(empty.mean_area.has_value());
  MaskRaster m = MaskRaster::Zero(8, 8);
  m.block(2, 2, 3, 3).setConstant(true);
  const LesionStats square = ComputeLesionStats(MakeMask(m));
  EXPECT_EQ(square.lesion_count, 1);
  EXPECT_EQ(square.mean_area, 9.0);
  EXPECT_EQ(square.width, 8);
}

TEST(LesionStatsTest, CountsSyntheticBlobs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthConfig config;
    config.seed = seed;
    config.width = 128;
    config.height = 128;
    config.count_mean = 12;
    config.area_mean = 15;
    const SynthMask synth = GenerateMask(config, "s");
    EXPECT_EQ(ComputeLesionStats(synth.mask).lesion_count,
              static_cast<std::int64_t>(synth.blobs.size()));
  }
}

TEST(QuantileTest, TypeSevenInterpolation) {
  EXPECT_DOUBLE_EQ(Quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(Quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(Quantile({4, 1, 3, 2}, 0.75), 3.25);
  EXPECT_DOUBLE_EQ(Quantile({7}, 0.9), 7.0);
}

LesionStats Stat(const std::string& id, std::int64_t count, double area) {
  LesionStats s;
  s.image_id = id;
  s.width = 100;
  s.height = 100;
  s.lesion_count = count;
  if (count > 0) s.mean_area = area;
  s.total_area = static_cast<std::int64_t>(count * area);
  return s;
}

TEST(StyleSummaryTest, ConstantData) {
  std::vector<LesionStats> stats;
  for (int i = 0; i < 6; ++i) stats.push_back(Stat(std::to_string(i), 10, 20));
  stats.push_back(Stat("none", 0, 0));
  const StyleSummary s = ComputeStyleSummary(stats, "D");
  EXPECT_EQ(s.n_images, 7u);
  EXPECT_EQ(s.n_contributing, 6u);
  EXPECT_DOUBLE_EQ(s.median_log_count, 1.0);
  EXPECT_NEAR(s.median_log_area, 1.30103, 1e-5);
  EXPECT_EQ(s.iqr_log_count, 0.0);
  EXPECT_EQ(s.iqr_log_area, 0.0);
  EXPECT_EQ(s.histogram.sum(), 6);
  EXPECT_EQ(CompareStyles(s, s), StyleRelation::kOverlapping);
}

TEST(StyleSummaryTest, AllEmptyImages) {
  const std::vector<LesionStats> stats = {Stat("a", 0, 0), Stat("b", 0, 0)};
  const StyleSummary s = ComputeStyleSummary(stats, "D");
  EXPECT_TRUE(s.empty);
  EXPECT_EQ(KindOf([&] { CompareStyles(s, s); }), ErrorKind::kComparison);
}

StyleSummary SyntheticStyle(LabelStyle mode, double count_mean, double area_mean) {
  std::vector<LesionStats> stats;
  for (int i = 0; i < 30; ++i) {
    SynthConfig config;
    config.seed = 77;
    config.width = 256;
    config.height = 256;
    config.count_mean = count_mean;
    config.area_mean = area_mean;
    config.mode = mode;
    stats.push_back(ComputeLesionStats(GenerateMask(config, std::to_string(i), i).mask));
  }
  return ComputeStyleSummary(stats, LabelStyleName(mode) == "fine" ? "F" : "C");
}

TEST(StyleSummaryTest, CoarseVersusFine) {
  const StyleSummary fine = SyntheticStyle(LabelStyle::kFine, 40, 8);
  const StyleSummary coarse = SyntheticStyle(LabelStyle::kCoarse, 4, 400);
  EXPECT_GT(coarse.median_log_area, fine.median_log_area);
  EXPECT_LT(coarse.median_log_count, fine.median_log_count);
  EXPECT_EQ(CompareStyles(coarse, fine), StyleRelation::kCoarser);
  EXPECT_EQ(CompareStyles(fine, coarse), StyleRelation::kFiner);
  EXPECT_EQ(fine.histogram.sum(), static_cast<int>(fine.n_contributing));
}

TEST(StyleSummaryTest, DifferentLesionsCannotBeCompared) {
  std::vector<LesionStats> a = {Stat("a", 3, 10)};
  std::vector<LesionStats> b = {Stat("b", 3, 10)};
  b[0].lesion = Lesion::kHE;
  EXPECT_EQ(KindOf([&] { CompareStyles(ComputeStyleSummary(a, "A"), ComputeStyleSummary(b, "B")); }),
            ErrorKind::kComparison);
}

TEST(HistogramTest, OutOfRangeValuesClampToEdgeBins) {
  const std::vector<LesionStats> stats = {Stat("big", 1, 1e9), Stat("small", 1, 1)};
  const StyleSummary s = ComputeStyleSummary(stats, "D");
  EXPECT_EQ(s.histogram(s.spec.log_area_bins - 1, 0), 1);
  EXPECT_EQ(s.histogram(0, 0), 1);
  const CsvTable csv = HistogramToCsv(s);
  EXPECT_EQ(csv.header, (CsvRow{"bin_log_area_lo", "bin_log_count_lo", "count"}));
}

TEST(QualityTest, Fractions) {
  const CsvTable grades = ParseCsv("image_id,grade\na,Good\nb,Good\nc,Usable\nd,Reject\n");
  const QualityDistribution d = ComputeQualityDistribution(grades, "D");
  EXPECT_EQ(d.good, 0.5);
  EXPECT_EQ(d.usable, 0.25);
  EXPECT_EQ(d.reject, 0.25);
  const QualityDistribution all = ComputeQualityDistribution(ParseCsv("image_id,grade\na,good\nb,GOOD\n"), "D");
  EXPECT_EQ(all.good, 1.0);
  EXPECT_EQ(all.usable + all.reject, 0.0);
  EXPECT_EQ(KindOf([] { ComputeQualityDistribution(ParseCsv("image_id,grade\na,OK\n"), "D"); }),
            ErrorKind::kParse);
}

TEST(LesionStatsCsvTest, RoundTrip) {
  const std::vector<LesionStats> stats = {Stat("a", 3, 10.5), Stat("b", 0, 0)};
  const auto back = LesionStatsFromCsv(ParseCsv(ToCsv(LesionStatsToCsv(stats))));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].mean_area, 10.5);
  EXPECT_FALSE(back[1].mean_area.has_value());
}

}  // namespace
}  // namespace sgl
