/*
 * Copyright 2026 The LEMoN Authors.
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

#include "lemon/dataset.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "lemon/common.h"
#include "test_util.h"

namespace lemon {
namespace {

using ::lemon::testing::make_dataset;
using ::lemon::testing::TempDir;

Dataset three_sample() {
  Dataset ds = make_dataset({{1, 0}, {0, 1}, {0.5f, 0.5f}},
                            {{1, 1}, {-1, 0}, {0.25f, -3}});
  ds.records[0].class_id = 2;
  ds.records[1].category = "animal";
  ds.records[2].noun_set = std::set<std::string>{"car", "road"};
  ds.records[2].split = Split::kVal;
  return ds;
}

void overwrite(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

TEST(DatasetIo, LoadsMinimalDirectory) {
  TempDir dir;
  write_dataset(three_sample(), dir / "ds");
  const Dataset ds = load_dataset(dir / "ds");
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.image_embeddings.dim(), 2u);
}

TEST(DatasetIo, RoundTripIsIdentical) {
  TempDir dir;
  const Dataset original = three_sample();
  write_dataset(original, dir / "ds");
  EXPECT_EQ(load_dataset(dir / "ds"), original);
}

TEST(DatasetIo, RoundTripKeepsFloatBitsExactly) {
  TempDir dir;
  Dataset ds = make_dataset({{std::numeric_limits<float>::denorm_min(), 1e-38f},
                             {-0.0f, 3.4e38f}},
                            {{0.1f, 0.2f}, {1.0f / 3.0f, -7.5f}});
  write_dataset(ds, dir / "ds");
  const Dataset back = load_dataset(dir / "ds");
  for (std::size_t i = 0; i < ds.image_embeddings.data().size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint32_t>(ds.image_embeddings.data()[i]),
              std::bit_cast<std::uint32_t>(back.image_embeddings.data()[i]));
  }
}

TEST(DatasetIo, PayloadIsLittleEndian) {
  TempDir dir;
  write_dataset(make_dataset({{1.0f}}, {{-2.0f}}), dir / "ds");
  const std::string bytes = read_file(dir / "ds" / "image_emb.f32");
  ASSERT_EQ(bytes.size(), 4u);
  // 1.0f is 0x3F800000.
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[3]), 0x3F);
}

TEST(DatasetIo, NoisedFieldsArePreserved) {
  TempDir dir;
  Dataset ds = three_sample();
  for (auto& r : ds.records) r.mislabel_flag = false;
  ds.records[0].mislabel_flag = true;
  ds.records[0].swap_source = 1;
  ds.manifest.noise = NoiseProvenance{"random", 0.4, 9, "train"};
  write_dataset(ds, dir / "ds");
  const Dataset back = load_dataset(dir / "ds");
  EXPECT_EQ(back.records[0].mislabel_flag, true);
  EXPECT_EQ(back.records[0].swap_source, 1);
  EXPECT_EQ(back.manifest.noise, ds.manifest.noise);
}

TEST(DatasetIo, WrongByteLengthIsDimensionMismatch) {
  TempDir dir;
  write_dataset(three_sample(), dir / "ds");
  overwrite(dir / "ds" / "image_emb.f32", std::string(20, '\0'));
  try {
    load_dataset(dir / "ds");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("image_emb.f32"), std::string::npos);
  }
}

TEST(DatasetIo, ZeroTextRowNamesTheRow) {
  TempDir dir;
  write_dataset(three_sample(), dir / "ds");
  std::string bytes = read_file(dir / "ds" / "text_emb.f32");
  std::fill(bytes.begin() + 8, bytes.begin() + 16, '\0');
  overwrite(dir / "ds" / "text_emb.f32", bytes);
  try {
    load_dataset(dir / "ds");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("text_emb.f32: row 1"), std::string::npos)
        << e.what();
  }
}

TEST(DatasetIo, NonFiniteValueRejected) {
  Dataset ds = three_sample();
  ds.image_embeddings.mutable_row(2)[0] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(ds.validate(), ValidationError);
}

TEST(DatasetIo, MissingFileRejected) {
  TempDir dir;
  write_dataset(three_sample(), dir / "ds");
  std::filesystem::remove(dir / "ds" / "records.jsonl");
  EXPECT_THROW(load_dataset(dir / "ds"), ValidationError);
}

TEST(DatasetIo, RecordErrorsNameTheRow) {
  TempDir dir;
  write_dataset(three_sample(), dir / "ds");
  overwrite(dir / "ds" / "records.jsonl",
            "{\"index\":0,\"split\":\"train\"}\n"
            "{\"index\":1,\"split\":\"bogus\"}\n"
            "{\"index\":2,\"split\":\"train\"}\n");
  try {
    load_dataset(dir / "ds");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("records.jsonl: row 1"), std::string::npos)
        << e.what();
  }
}

TEST(DatasetIo, IndexMustMatchRow) {
  Dataset ds = three_sample();
  ds.records[1].index = 7;
  EXPECT_THROW(ds.validate(), ValidationError);
}

TEST(DatasetIo, PartialFlagsInSplitRejected) {
  Dataset ds = three_sample();
  ds.records[0].mislabel_flag = true;
  EXPECT_THROW(ds.validate(), ValidationError);
}

TEST(DatasetIo, SelfSwapSourceRejected) {
  Dataset ds = three_sample();
  ds.records[1].swap_source = 1;
  EXPECT_THROW(ds.validate(), ValidationError);
}

TEST(DatasetIo, RecordCountMustMatchManifest) {
  TempDir dir;
  write_dataset(three_sample(), dir / "ds");
  overwrite(dir / "ds" / "records.jsonl", "{\"index\":0,\"split\":\"train\"}\n");
  EXPECT_THROW(load_dataset(dir / "ds"), ValidationError);
}

TEST(DatasetIo, UnwritableLocationIsIoError) {
  TempDir dir;
  write_file_atomic(dir / "plain_file", "x");
  EXPECT_THROW(write_dataset(three_sample(), dir / "plain_file" / "ds"), IoError);
}

TEST(DatasetIo, RewriteReplacesDirectory) {
  TempDir dir;
  write_dataset(three_sample(), dir / "ds");
  Dataset smaller = make_dataset({{1, 2}}, {{3, 4}});
  write_dataset(smaller, dir / "ds");
  EXPECT_EQ(load_dataset(dir / "ds"), smaller);
  EXPECT_FALSE(std::filesystem::exists(dir / "ds.staging"));
}

TEST(ScoreTableIo, TwoRowRoundTrip) {
  ScoreTable t;
  t.push_back({3, "lemon", 1.25, ScoreBreakdown{0.5, 0.1, 0.05, 1.25}});
  t.push_back({8, "lemon", -0.1 / 3.0, ScoreBreakdown{0.2, 1.0 / 7.0, 0.0, -0.1 / 3.0}});
  EXPECT_EQ(parse_scores(format_scores(t)), t);
}

TEST(ScoreTableIo, TinyScoreDoesNotUnderflow) {
  ScoreTable t{{0, "clip-sim", 1e-300, std::nullopt}};
  const ScoreTable back = parse_scores(format_scores(t));
  EXPECT_EQ(back[0].score, 1e-300);
  ScoreTable sub{{0, "clip-sim", 4.9406564584124654e-324, std::nullopt}};
  EXPECT_EQ(parse_scores(format_scores(sub))[0].score, 4.9406564584124654e-324);
}

TEST(ScoreTableIo, BaselineRowsHaveEmptyBreakdown) {
  ScoreTable t{{5, "deep-knn", 0.5, std::nullopt}};
  EXPECT_EQ(format_scores(t), "index,method,score,d_mm,s_n,s_m\n5,deep-knn,0.5,,,\n");
}

TEST(ScoreTableIo, DuplicateIndexRejected) {
  EXPECT_THROW(parse_scores("index,method,score,d_mm,s_n,s_m\n"
                            "1,lemon,0.5,,,\n1,lemon,0.6,,,\n"),
               ValidationError);
}

TEST(ScoreTableIo, MalformedRowsRejected) {
  const std::string h = "index,method,score,d_mm,s_n,s_m\n";
  EXPECT_THROW(parse_scores(h + "1,lemon,abc,,,\n"), ValidationError);
  EXPECT_THROW(parse_scores(h + "1,lemon,0.5,0.1,,\n"), ValidationError);
  EXPECT_THROW(parse_scores(h + "1,lemon,0.5\n"), ValidationError);
  EXPECT_THROW(parse_scores(h + "-1,lemon,0.5,,,\n"), ValidationError);
  EXPECT_THROW(parse_scores(h + "1,lemon,inf,,,\n"), ValidationError);
  EXPECT_THROW(parse_scores("idx,score\n"), ValidationError);
  EXPECT_THROW(parse_scores(""), ValidationError);
}

TEST(ScoreTableIo, NonFiniteScoreNotWritten) {
  TempDir dir;
  ScoreTable t{{0, "lemon", std::nan(""), std::nullopt}};
  EXPECT_THROW(write_scores(t, dir / "s.csv"), ValidationError);
}

TEST(Common, SplitNamesRoundTrip) {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    EXPECT_EQ(parse_split(split_name(s)), s);
  }
  EXPECT_THROW(parse_split("dev"), ValidationError);
}

TEST(Common, ParallelForCoversEveryIndexOnce) {
  for (int threads : {1, 3, 8}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (int h : hits) ASSERT_EQ(h, 1);
  }
}

TEST(Common, ParallelForPropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 57) throw ValidationError("boom");
                            }),
               ValidationError);
}

}  // namespace
}  // namespace lemon
