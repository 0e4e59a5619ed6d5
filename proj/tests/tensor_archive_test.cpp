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

#include "sgl/tensor_archive.hpp"

#include <gtest/gtest.h>

#include "archive_fixtures.hpp"
#include "oracles.hpp"
#include "sgl/error.hpp"

namespace sgl {
namespace {

using testing::RandomArchive;
using testing::RewriteManifest;

TensorArchive SmallArchive() {
  TensorArchive a;
  a.metadata.model_id = "unet";
  a.metadata.iteration = 3000;
  a.metadata.hyperparam_id = "lr1e-3";
  a.metadata.role_prefixes = RolePrefixes{{Role::kEncoder, {"enc."}}, {Role::kDecoder, {"dec."}}};
  Eigen::ArrayXf w(6);
  w << 1, 2, 3, 4, 5, 6;
  a.tensors.emplace("enc.w", Tensor({2, 3}, w));
  Eigen::ArrayXf b(2);
  b << -1.5f, 0.25f;
  a.tensors.emplace("dec.b", Tensor({2}, b));
  return a;
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kUsage;
}

TEST(TensorArchiveTest, RoundTripIsFieldForField) {
  const TensorArchive a = SmallArchive();
  const TensorArchive b = ParseArchive(SerializeArchive(a));
  EXPECT_EQ(a, b);
}

TEST(TensorArchiveTest, RecordsCarryByteSizes) {
  const auto records = LayoutRecords(SmallArchive());
  EXPECT_EQ(records.at("enc.w").nbytes, 24u);
  EXPECT_EQ(records.at("dec.b").nbytes, 8u);
  // Sorted by name: dec.b precedes enc.w in the data section.
  EXPECT_EQ(records.at("dec.b").offset, 0u);
  EXPECT_EQ(records.at("enc.w").offset, 8u);
}

TEST(TensorArchiveTest, SerializationIsDeterministic) {
  EXPECT_EQ(SerializeArchive(SmallArchive()), SerializeArchive(SmallArchive()));
}

TEST(TensorArchiveTest, FileRoundTrip) {
  testing::ScratchDir dir("archive");
  const TensorArchive a = RandomArchive(7, 8);
  WriteArchive(a, dir.str("a.sglb"));
  EXPECT_EQ(ReadArchive(dir.str("a.sglb")), a);
}

TEST(TensorArchiveTest, EmptyTensorMapIsValid) {
  TensorArchive a;
  a.metadata.model_id = "empty";
  const std::string bytes = SerializeArchive(a);
  EXPECT_EQ(ParseArchive(bytes), a);
}

TEST(TensorArchiveTest, ExtraMetadataSurvives) {
  TensorArchive a = SmallArchive();
  a.metadata.extra["framework"] = "torch";
  EXPECT_EQ(ParseArchive(SerializeArchive(a)).metadata.extra["framework"], "torch");
}

TEST(TensorArchiveTest, ZeroDimensionRejected) {
  TensorArchive a = SmallArchive();
  a.tensors.emplace("enc.z", Tensor({0, 3}, Eigen::ArrayXf()));
  EXPECT_EQ(KindOf([&] { SerializeArchive(a); }), ErrorKind::kValidation);
}

TEST(TensorArchiveTest, ShapeValueMismatchRejected) {
  TensorArchive a = SmallArchive();
  a.tensors.at("enc.w").shape = {4, 2};
  EXPECT_EQ(KindOf([&] { SerializeArchive(a); }), ErrorKind::kValidation);
}

TEST(TensorArchiveTest, DeclaredByteCountMustMatchShape) {
  const std::string bytes = RewriteManifest(SerializeArchive(SmallArchive()), [](auto& m) {
    m["tensors"]["enc.w"]["nbytes"] = 20;
  });
  EXPECT_EQ(KindOf([&] { ParseArchive(bytes); }), ErrorKind::kIntegrity);
}

TEST(TensorArchiveTest, MisalignedOffsetRejected) {
  const std::string bytes = RewriteManifest(SerializeArchive(SmallArchive()), [](auto& m) {
    m["tensors"]["enc.w"]["offset"] = 6;
  });
  EXPECT_EQ(KindOf([&] { ParseArchive(bytes); }), ErrorKind::kIntegrity);
}

TEST(TensorArchiveTest, OutOfRangeOffsetRejected) {
  const std::string bytes = RewriteManifest(SerializeArchive(SmallArchive()), [](auto& m) {
    m["tensors"]["enc.w"]["offset"] = 64;
  });
  EXPECT_EQ(KindOf([&] { ParseArchive(bytes); }), ErrorKind::kIntegrity);
}

TEST(TensorArchiveTest, OverlappingExtentsRejected) {
  const std::string bytes = RewriteManifest(SerializeArchive(SmallArchive()), [](auto& m) {
    m["tensors"]["enc.w"]["offset"] = 4;
  });
  EXPECT_EQ(KindOf([&] { ParseArchive(bytes); }), ErrorKind::kIntegrity);
}

TEST(TensorArchiveTest, TruncatedDataRejected) {
  std::string bytes = SerializeArchive(SmallArchive());
  bytes.resize(bytes.size() - 4);
  EXPECT_EQ(KindOf([&] { ParseArchive(bytes); }), ErrorKind::kIntegrity);
}

TEST(TensorArchiveTest, BadMagicAndJsonAreFormatErrors) {
  std::string bytes = SerializeArchive(SmallArchive());
  std::string wrong = bytes;
  wrong[0] = 'X';
  EXPECT_EQ(KindOf([&] { ParseArchive(wrong); }), ErrorKind::kFormat);
  std::string broken = bytes;
  broken[kArchiveMagic.size() + 8] = '[';
  EXPECT_EQ(KindOf([&] { ParseArchive(broken); }), ErrorKind::kFormat);
  EXPECT_EQ(KindOf([&] { ParseArchive("SGL"); }), ErrorKind::kFormat);
}

TEST(TensorArchiveTest, UnsupportedDtype) {
  const std::string bytes = RewriteManifest(SerializeArchive(SmallArchive()), [](auto& m) {
    m["tensors"]["dec.b"]["dtype"] = "f16";
  });
  EXPECT_EQ(KindOf([&] { ParseArchive(bytes); }), ErrorKind::kUnsupportedDtype);
}

TEST(TensorArchiveTest, PartitionByRole) {
  const TensorArchive a = SmallArchive();
  EXPECT_EQ(PartitionByRole(a, Scope::kEncoder), std::set<std::string>{"enc.w"});
  EXPECT_EQ(PartitionByRole(a, Scope::kDecoder), std::set<std::string>{"dec.b"});
  EXPECT_EQ(PartitionByRole(a, Scope::kFull), (std::set<std::string>{"dec.b", "enc.w"}));
}

TEST(TensorArchiveTest, PartitionWithoutRoleMapFails) {
  TensorArchive a = SmallArchive();
  a.metadata.role_prefixes.reset();
  EXPECT_EQ(KindOf([&] { PartitionByRole(a, Scope::kDecoder); }), ErrorKind::kMissingRoleMap);
  EXPECT_EQ(PartitionByRole(a, Scope::kFull).size(), 2u);
}

TEST(TensorArchiveTest, RandomRoundTrips) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const TensorArchive a = RandomArchive(s, s + 1000);
    ASSERT_EQ(ParseArchive(SerializeArchive(a)), a) << "seed " << s;
  }
}

}  // namespace
}  // namespace sgl
