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

#include "lemon/scoring.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lemon/common.h"
#include "lemon/rng.h"
#include "test_util.h"

namespace lemon {
namespace {

using ::lemon::testing::make_dataset;
using ::lemon::testing::random_dataset;

// Straight-line reference implementation, computed in double from the raw
// float rows without any of the library's helpers.
double ref_distance(std::span<const float> a, std::span<const float> b,
                    Metric metric) {
  double dot = 0, na = 0, nb = 0, sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
    sq += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  }
  if (metric == Metric::kEuclidean) return std::sqrt(sq);
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

ScoreBreakdown naive_lemon(const Dataset& ds, std::size_t q, Split ref,
                           const LemonParams& p) {
  const auto& X = ds.image_embeddings;
  const auto& Y = ds.text_embeddings;
  auto mm = [&](std::size_t i) {
    return ref_distance(X.row(i), Y.row(i), Metric::kCosine);
  };
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.records[i].split == ref && i != q) pool.push_back(i);
  }
  auto nearest = [&](const EmbeddingMatrix& M, Metric metric) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j : pool) d.push_back({ref_distance(M.row(q), M.row(j), metric), j});
    std::sort(d.begin(), d.end());
    d.resize(static_cast<std::size_t>(p.k));
    return d;
  };
  double s_n = 0, s_m = 0;
  for (auto [dx, j] : nearest(X, p.dX_metric)) {
    s_n += ref_distance(Y.row(q), Y.row(j), p.dY_metric) *
           std::exp(-p.tau1_n * dx) * std::exp(-p.tau2_n * mm(j));
  }
  for (auto [dy, j] : nearest(Y, p.dY_metric)) {
    s_m += ref_distance(X.row(q), X.row(j), p.dX_metric) *
           std::exp(-p.tau1_m * dy) * std::exp(-p.tau2_m * mm(j));
  }
  ScoreBreakdown b;
  b.d_mm = mm(q);
  b.s_n = s_n / p.k;
  b.s_m = s_m / p.k;
  b.s = b.d_mm + p.beta * b.s_n + p.gamma * b.s_m;
  return b;
}

TEST(LemonParams, JsonRoundTripAndDefaults) {
  LemonParams p;
  p.k = 7;
  p.beta = 12.5;
  p.tau1_m = 0.0;
  p.dY_metric = Metric::kEuclidean;
  EXPECT_EQ(params_from_json(params_to_json(p)), p);
  EXPECT_EQ(params_from_json("{}"), LemonParams{});
  EXPECT_THROW(params_from_json("{\"k\":0}"), ValidationError);
  EXPECT_THROW(params_from_json("{\"dX_metric\":\"discrete\"}"), ValidationError);
  EXPECT_THROW(params_from_json("[1]"), ValidationError);
  EXPECT_THROW(params_from_json("{\"k\":\"five\"}"), ValidationError);
}

TEST(Lemon, MatchesNaiveOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    const Dataset ds = random_dataset(60, 5, 1000 + trial, true);
    LemonParams p;
    p.k = 1 + static_cast<int>(rng.below(20));
    p.beta = rng.uniform() * 10;
    p.gamma = rng.uniform() * 10;
    p.tau1_n = rng.uniform() * 5;
    p.tau2_n = rng.uniform() * 5;
    p.tau1_m = rng.uniform() * 5;
    p.tau2_m = rng.uniform() * 5;
    p.dX_metric = trial % 2 ? Metric::kEuclidean : Metric::kCosine;
    p.dY_metric = trial % 3 ? Metric::kCosine : Metric::kEuclidean;
    const ScoringContext ctx(ds, Split::kTrain, p.dX_metric, p.dY_metric);
    for (std::size_t q = 0; q < ds.size(); ++q) {
      const ScoreBreakdown got = score_lemon(ctx, q, p);
      const ScoreBreakdown want = naive_lemon(ds, q, Split::kTrain, p);
      ASSERT_NEAR(got.d_mm, want.d_mm, 1e-10);
      ASSERT_NEAR(got.s_n, want.s_n, 1e-10);
      ASSERT_NEAR(got.s_m, want.s_m, 1e-10);
      ASSERT_NEAR(got.s, want.s, 1e-10);
    }
  }
}

TEST(Lemon, ZeroWeightsReduceToClipSimilarity) {
  const Dataset ds = random_dataset(100, 8, 5, true);
  LemonParams p;
  p.beta = 0;
  p.gamma = 0;
  const ScoringContext ctx(ds, Split::kTrain, p.dX_metric, p.dY_metric);
  for (std::size_t q = 0; q < ds.size(); ++q) {
    EXPECT_EQ(score_lemon(ctx, q, p).s, score_clip_similarity(ds, q));
  }
}

TEST(Lemon, ClipSimilarityExamples) {
  const Dataset ds = make_dataset({{1, 0}, {1, 0}}, {{1, 0}, {0, 1}});
  EXPECT_DOUBLE_EQ(score_clip_similarity(ds, 0), 0.0);
  EXPECT_DOUBLE_EQ(score_clip_similarity(ds, 1), 1.0);
}

TEST(Lemon, ExternalQueryMatchesEquivalentHeldOutRow) {
  Dataset ds = random_dataset(40, 4, 17, true);
  const LemonParams p{.k = 5};
  const ScoringContext ctx(ds, Split::kTrain, p.dX_metric, p.dY_metric);
  const std::size_t q = 3;  // a test row, so no self-exclusion applies
  ASSERT_EQ(ds.records[q].split, Split::kTest);
  ExternalQuery ext;
  ext.image.assign(ds.image_embeddings.row(q).begin(), ds.image_embeddings.row(q).end());
  ext.text.assign(ds.text_embeddings.row(q).begin(), ds.text_embeddings.row(q).end());
  const ScoreBreakdown a = score_lemon(ctx, q, p);
  const ScoreBreakdown b = score_lemon(ctx, ext, p);
  EXPECT_EQ(a, b);
}

TEST(Lemon, LargeTemperaturesStayFinite) {
  const Dataset ds = random_dataset(30, 3, 2);
  LemonParams p;
  p.k = 3;
  p.tau1_n = -1e6;
  p.tau2_m = 1e6;
  const ScoringContext ctx(ds, Split::kTrain, p.dX_metric, p.dY_metric);
  EXPECT_TRUE(std::isfinite(score_lemon(ctx, 0, p).s));
}

TEST(Lemon, SelfExclusionNeighborCounts) {
  const Dataset ds = random_dataset(10, 3, 3);
  MethodConfig config;
  config.params.k = 9;
  EXPECT_EQ(score_split(ds, Split::kTrain, Split::kTrain, "lemon", config).size(), 10u);
  config.params.k = 10;
  EXPECT_THROW(score_split(ds, Split::kTrain, Split::kTrain, "lemon", config),
               ValidationError);
}

TEST(Lemon, DiscreteTextMetricUsesDisagreement) {
  // Four images on a line; labels 0,0,1,1. With k=1, tau=0, s_n is whether
  // the nearest image carries a different label.
  Dataset ds = make_dataset({{1, 0}, {1, 0.1f}, {0.1f, 1}, {0, 1}},
                            {{1, 1}, {1, 2}, {2, 1}, {3, 1}});
  for (std::size_t i = 0; i < 4; ++i) ds.records[i].class_id = i < 2 ? 0 : 1;
  ds.records[3].class_id = 0;
  LemonParams p{.k = 1, .beta = 1, .gamma = 0, .tau1_n = 0, .tau2_n = 0,
                .tau1_m = 0, .tau2_m = 0, .dX_metric = Metric::kCosine,
                .dY_metric = Metric::kDiscrete};
  const ScoringContext ctx(ds, Split::kTrain, p.dX_metric, p.dY_metric);
  EXPECT_EQ(score_lemon(ctx, 0, p).s_n, 0.0);
  EXPECT_EQ(score_lemon(ctx, 2, p).s_n, 1.0);
  EXPECT_EQ(score_lemon(ctx, 3, p).s_n, 1.0);
}

TEST(DeepKnn, Examples) {
  // Query 0 at the origin of a star; neighbors are rows 1..4.
  Dataset ds = make_dataset({{1, 0}, {1, 0.01f}, {1, 0.02f}, {1, 0.03f}, {1, 0.04f}},
                            {{1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}});
  const ScoringContext ctx(ds, Split::kTrain, Metric::kCosine, Metric::kCosine);
  EXPECT_EQ(score_deep_knn(ctx, 0, 4, {0, 0, 0, 0, 0}), 0.0);
  EXPECT_EQ(score_deep_knn(ctx, 0, 4, {0, 1, 1, 1, 1}), 1.0);
  EXPECT_EQ(score_deep_knn(ctx, 0, 4, {0, 0, 0, 0, 1}), 0.25);
  EXPECT_THROW(score_deep_knn(ctx, 0, 4, {0, 0}), ValidationError);
}

TEST(Discrepancy, TwoHopTrace) {
  Dataset ds = make_dataset({{1, 0}, {0.6f, 0.8f}}, {{1, 0}, {0, 1}});
  const ScoringContext ctx(ds, Split::kTrain, Metric::kCosine, Metric::kCosine);
  // Hop 1 from the query text lands on row 0, hop 2 from row 0 on row 1.
  const ExternalQuery q{{1, 0}, {1, 0}, std::nullopt};
  EXPECT_NEAR(score_discrepancy(ctx, q, 1), 1.0 - 0.6, 1e-7);
}

TEST(Discrepancy, IdenticalImagesScoreZero) {
  Dataset ds = random_dataset(12, 3, 8);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto row = ds.image_embeddings.mutable_row(i);
    std::fill(row.begin(), row.end(), 0.5f);
  }
  const ScoringContext ctx(ds, Split::kTrain, Metric::kCosine, Metric::kCosine);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_NEAR(score_discrepancy(ctx, i, 3), 0.0, 1e-12);
  }
}

TEST(Discrepancy, DuplicatePathsCountOnce) {
  // Rows 1 and 2 are both first-degree neighbors of the query and both reach
  // row 3 second; the set semantics averages each reached row once.
  Dataset ds = make_dataset({{1, 0}, {1, 0}, {1, 0}, {0, 1}, {-1, 0}},
                            {{1, 0}, {1, 0.01f}, {1, -0.01f}, {1, 0.2f}, {-1, 0.1f}},
                            Split::kTrain);
  ds.records[0].split = Split::kTest;
  const ScoringContext ctx(ds, Split::kTrain, Metric::kCosine, Metric::kCosine);
  // k=2: hop 1 -> {1,2}; from 1 -> {2,3}, from 2 -> {1,3}; set {1,2,3}.
  const double want = (0.0 + 0.0 + 1.0) / 3.0;
  EXPECT_NEAR(score_discrepancy(ctx, 0, 2), want, 1e-12);
}

TEST(Discrepancy, MatchesBruteForceSetOracle) {
  const Dataset ds = random_dataset(50, 4, 12, true);
  const ScoringContext ctx(ds, Split::kTrain, Metric::kCosine, Metric::kCosine);
  const auto pool = ds.split_indices(Split::kTrain);
  auto knn = [&](std::span<const float> v, std::size_t k, std::optional<std::size_t> ex) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j : pool) {
      if (ex && j == *ex) continue;
      d.push_back({ref_distance(v, ds.text_embeddings.row(j), Metric::kCosine), j});
    }
    std::sort(d.begin(), d.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
    return out;
  };
  for (std::size_t q = 0; q < ds.size(); ++q) {
    const std::optional<std::size_t> ex =
        ds.records[q].split == Split::kTrain ? std::optional<std::size_t>(q) : std::nullopt;
    std::set<std::size_t> reached;
    for (std::size_t j : knn(ds.text_embeddings.row(q), 4, ex)) {
      for (std::size_t m : knn(ds.text_embeddings.row(j), 4, j)) {
        if (!ex || m != *ex) reached.insert(m);
      }
    }
    double want = 0;
    for (std::size_t m : reached) {
      want += ref_distance(ds.image_embeddings.row(q), ds.image_embeddings.row(m),
                           Metric::kCosine);
    }
    want /= static_cast<double>(reached.size());
    ASSERT_NEAR(score_discrepancy(ctx, q, 4), want, 1e-10) << "row " << q;
  }
}

TEST(ScoreSplit, MethodsShareIndexColumn) {
  Dataset ds = random_dataset(80, 4, 31, true);
  MethodConfig config;
  config.params.k = 5;
  config.num_text_clusters = 6;
  std::vector<std::int64_t> first;
  for (const char* method : {"lemon", "clip-sim", "deep-knn", "discrepancy"}) {
    const ScoreTable t = score_split(ds, Split::kTrain, Split::kTest, method, config);
    ASSERT_EQ(t.size(), ds.split_indices(Split::kTest).size());
    std::vector<std::int64_t> idx;
    for (const auto& r : t) {
      idx.push_back(r.index);
      EXPECT_EQ(r.method, method);
      EXPECT_EQ(r.breakdown.has_value(), std::string(method) == "lemon");
    }
    if (first.empty()) first = idx;
    EXPECT_EQ(idx, first);
  }
}

TEST(ScoreSplit, DeterministicAcrossThreads) {
  const Dataset ds = random_dataset(120, 6, 41, true);
  MethodConfig config;
  config.params.k = 7;
  config.num_text_clusters = 5;
  for (const char* method : {"lemon", "deep-knn", "discrepancy"}) {
    EXPECT_EQ(score_split(ds, Split::kTrain, Split::kTest, method, config, 1),
              score_split(ds, Split::kTrain, Split::kTest, method, config, 6));
  }
}

TEST(ScoreSplit, Errors) {
  const Dataset ds = random_dataset(20, 3, 1);
  MethodConfig config;
  config.params.k = 3;
  EXPECT_THROW(score_split(ds, Split::kTrain, Split::kTrain, "cleanlab", config),
               ValidationError);
  EXPECT_THROW(score_split(ds, Split::kTrain, Split::kTest, "lemon", config),
               ValidationError);
  EXPECT_THROW(score_split(ds, Split::kVal, Split::kTrain, "lemon", config),
               ValidationError);
  config.params.dY_metric = Metric::kDiscrete;
  EXPECT_THROW(score_split(ds, Split::kTrain, Split::kTrain, "lemon", config),
               ValidationError);
}

TEST(DiscreteLabels, PrefersClassIdsThenClusters) {
  Dataset ds = random_dataset(30, 3, 6);
  const auto clustered = discrete_labels(ds, 4, 0);
  EXPECT_EQ(clustered.size(), 30u);
  EXPECT_LE(*std::max_element(clustered.begin(), clustered.end()), 3);
  for (std::size_t i = 0; i < ds.size(); ++i) ds.records[i].class_id = int(i % 3) + 10;
  const auto ids = discrete_labels(ds, 4, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(ids[i], int(i % 3) + 10);
}

}  // namespace
}  // namespace lemon
