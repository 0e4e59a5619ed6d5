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

#include "sgl/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgl/error.hpp"
#include "sgl/metrics.hpp"

namespace sgl {
namespace {

using testing::OracleComponentAreas;
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

SynthConfig Config(std::uint64_t seed, double count, double area, LabelStyle mode = LabelStyle::kFine) {
  SynthConfig c;
  c.seed = seed;
  c.width = 128;
  c.height = 128;
  c.count_mean = count;
  c.area_mean = area;
  c.mode = mode;
  return c;
}

TEST(SynthMaskTest, ZeroCountIsEmpty) {
  const SynthMask s = GenerateMask(Config(1, 0, 20), "e");
  EXPECT_TRUE(s.blobs.empty());
  EXPECT_EQ(s.mask.bits.count(), 0);
}

TEST(SynthMaskTest, BlobsAreSeparatedComponents) {
  for (LabelStyle mode : {LabelStyle::kFine, LabelStyle::kCoarse}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SynthMask s = GenerateMask(Config(seed, 5, mode == LabelStyle::kFine ? 12 : 150, mode), "b");
      std::vector<std::int64_t> expected;
      for (const Blob& b : s.blobs) expected.push_back(b.area);
      std::sort(expected.begin(), expected.end());
      // Blobs are 4-connected and never touch, even diagonally.
      EXPECT_EQ(OracleComponentAreas(ToPlain(s.mask.bits), false), expected);
      EXPECT_EQ(OracleComponentAreas(ToPlain(s.mask.bits), true), expected);
      for (const Blob& b : s.blobs) EXPECT_TRUE(s.mask.bits(b.first_y, b.first_x));
    }
  }
}

TEST(SynthMaskTest, Deterministic) {
  const SynthMask a = GenerateMask(Config(42, 10, 20), "x", 3);
  const SynthMask b = GenerateMask(Config(42, 10, 20), "x", 3);
  EXPECT_TRUE((a.mask.bits == b.mask.bits).all());
  const SynthMask c = GenerateMask(Config(42, 10, 20), "x", 4);
  EXPECT_FALSE((a.mask.bits == c.mask.bits).all());
}

TEST(SynthMaskTest, CountAndAreaStatistics) {
  const double lambda = 6.0;
  const double mu = 15.0;
  const int n_images = 300;
  double blobs = 0;
  double area_sum = 0;
  for (int i = 0; i < n_images; ++i) {
    const SynthMask s = GenerateMask(Config(5, lambda, mu), "s", i);
    blobs += static_cast<double>(s.blobs.size());
    for (const Blob& b : s.blobs) area_sum += static_cast<double>(b.area);
  }
  // Poisson count: sd sqrt(lambda). Area 1 + Poisson(mu - 1): sd sqrt(mu - 1).
  EXPECT_NEAR(blobs / n_images, lambda, 3 * std::sqrt(lambda / n_images));
  EXPECT_NEAR(area_sum / blobs, mu, 3 * std::sqrt((mu - 1) / blobs));
}

TEST(SynthMaskTest, ImpossiblePackingFails) {
  SynthConfig c = Config(1, 50, 60);
  c.width = 12;
  c.height = 12;
  EXPECT_EQ(KindOf([&] { GenerateMask(c, "p"); }), ErrorKind::kPacking);
}

TEST(SynthMaskTest, InvalidConfig) {
  EXPECT_EQ(KindOf([] { GenerateMask(Config(1, 3, 0.5), "v"); }), ErrorKind::kValidation);
  EXPECT_EQ(KindOf([] { GenerateMask(Config(1, -1, 5), "v"); }), ErrorKind::kValidation);
}

TEST(SynthPredictionTest, PerfectQuality) {
  const SynthMask s = GenerateMask(Config(3, 8, 20), "q");
  const ProbabilityMap p = GeneratePrediction(s.mask, 1.0, 9);
  EXPECT_EQ(BinnedAupr(p, s.mask).value, 1.0);
  EXPECT_EQ(Dice(Binarize(p, 0.5), s.mask), 1.0);
}

TEST(SynthPredictionTest, DiceIncreasesWithQuality) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SynthMask s = GenerateMask(Config(seed, 8, 30), "q");
    const double hi = Dice(Binarize(GeneratePrediction(s.mask, 1.0, seed), 0.5), s.mask);
    const double lo = Dice(Binarize(GeneratePrediction(s.mask, 0.5, seed), 0.5), s.mask);
    EXPECT_GT(hi, lo) << "seed " << seed;
  }
}

TEST(SynthPredictionTest, MeanMetricsNonDecreasingInQuality) {
  double last_dice = -1.0;
  double last_aupr = -1.0;
  for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double dice = 0.0;
    double aupr = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SynthMask s = GenerateMask(Config(seed, 8, 30), "m");
      const ProbabilityMap p = GeneratePrediction(s.mask, q, 100 + seed);
      dice += Dice(Binarize(p, 0.5), s.mask);
      aupr += BinnedAupr(p, s.mask).value;
    }
    EXPECT_GE(dice, last_dice) << "q=" << q;
    EXPECT_GE(aupr, last_aupr) << "q=" << q;
    last_dice = dice;
    last_aupr = aupr;
  }
}

TEST(SynthPredictionTest, DeterministicAndOnGrid) {
  const SynthMask s = GenerateMask(Config(3, 8, 20), "q");
  const ProbabilityMap a = GeneratePrediction(s.mask, 0.7, 11);
  const ProbabilityMap b = GeneratePrediction(s.mask, 0.7, 11);
  EXPECT_TRUE((a.probs == b.probs).all());
  for (Eigen::Index i = 0; i < a.probs.size(); ++i) {
    const double v = a.probs.data()[i];
    ASSERT_EQ(DequantizeProbability(QuantizeProbability(v)), v);
  }
}

TEST(CoarsenTest, DilationGrowsAndContains) {
  MaskRaster m = MaskRaster::Zero(15, 15);
  m(7, 7) = true;
  const LesionMask coarse = CoarsenMask(testing::MakeMask(m), 2);
  // Disc of radius 2: 13 pixels.
  EXPECT_EQ(coarse.bits.count(), 13);
  EXPECT_TRUE(coarse.bits(7, 9));
  EXPECT_FALSE(coarse.bits(9, 9));
  EXPECT_TRUE((CoarsenMask(testing::MakeMask(m), 0).bits == m).all());
}

TEST(SynthDatasetTest, WritesMasksPredictionsAndManifest) {
  testing::ScratchDir dir("synth");
  const nlohmann::json j = {{"dataset_id", "SYN"},
                            {"seed", 4},
                            {"n_images", 6},
                            {"width", 48},
                            {"height", 40},
                            {"quality", 0.9},
                            {"lesions", {{{"lesion", "EX"}, {"count_mean", 3}, {"area_mean", 10}},
                                         {{"lesion", "MA"}, {"count_mean", 2}, {"area_mean", 4}}}}};
  const SynthDatasetConfig config = SynthDatasetConfigFromJson(j);
  const DatasetManifest m = WriteSynthDataset(config, dir.str(), 3);
  EXPECT_EQ(m.images.size(), 6u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "manifest.json"));
  const LesionMask mask = LoadMask((dir.path() / "masks" / MaskFilename("SYN_0000", Lesion::kMA)).string());
  EXPECT_EQ(mask.width(), 48);
  EXPECT_EQ(mask.height(), 40);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "pred" / ProbabilityFilename("SYN_0005", Lesion::kEX)));

  testing::ScratchDir again("synth");
  WriteSynthDataset(config, again.str(), 1);
  for (const char* leaf : {"masks/SYN_0003.EX.png", "pred/SYN_0004.MA.prob.png", "manifest.json"}) {
    EXPECT_EQ(ReadTextFile((dir.path() / leaf).string()), ReadTextFile((again.path() / leaf).string()))
        << leaf;
  }
}

}  // namespace
}  // namespace sgl
