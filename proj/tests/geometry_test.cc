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

#include "lemon/geometry.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lemon/common.h"
#include "lemon/rng.h"
#include "test_util.h"

namespace lemon {
namespace {

using V = std::vector<float>;

TEST(Distance, CosineExamples) {
  EXPECT_DOUBLE_EQ(cosine_distance(V{1, 0}, V{1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_distance(V{1, 0}, V{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_distance(V{1, 0}, V{-1, 0}), 2.0);
}

TEST(Distance, CosineIsScaleInvariantAndBounded) {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    V u(5), v(5);
    for (auto& x : u) x = static_cast<float>(rng.normal());
    for (auto& x : v) x = static_cast<float>(rng.normal());
    const double d = cosine_distance(u, v);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
    V u3 = u;
    for (auto& x : u3) x *= 4.0f;
    EXPECT_NEAR(cosine_distance(u3, v), d, 1e-6);
    EXPECT_DOUBLE_EQ(cosine_distance(u, v), cosine_distance(v, u));
  }
}

TEST(Distance, CosineRejectsZeroVectorAndDimMismatch) {
  EXPECT_THROW(cosine_distance(V{0, 0}, V{1, 0}), ValidationError);
  EXPECT_THROW(cosine_distance(V{1, 0, 0}, V{1, 0}), ValidationError);
}

TEST(Distance, EuclideanExamples) {
  EXPECT_DOUBLE_EQ(euclidean_distance(V{0, 0}, V{3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(V{2, -1}, V{2, -1}), 0.0);
  EXPECT_NEAR(euclidean_distance(V{1, 1}, V{2, 2}), 1.41421356, 1e-8);
  EXPECT_THROW(euclidean_distance(V{1}, V{1, 2}), ValidationError);
}

TEST(Distance, EuclideanTriangleInequality) {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    V a(3), b(3), c(3);
    for (auto* v : {&a, &b, &c}) {
      for (auto& x : *v) x = static_cast<float>(rng.normal());
    }
    EXPECT_LE(euclidean_distance(a, c),
              euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-12);
  }
}

TEST(Distance, DiscreteDisagreementIndicator) {
  EXPECT_EQ(discrete_distance(3, 3), 0.0);
  EXPECT_EQ(discrete_distance(3, 5), 1.0);
  EXPECT_EQ(discrete_distance(0, 0), 0.0);
}

TEST(Distance, MetricNames) {
  for (Metric m : {Metric::kCosine, Metric::kEuclidean, Metric::kDiscrete}) {
    EXPECT_EQ(parse_metric(metric_name(m)), m);
  }
  EXPECT_THROW(parse_metric("manhattan"), ValidationError);
}

EmbeddingMatrix matrix(const std::vector<V>& rows) {
  V data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return EmbeddingMatrix(rows.size(), rows[0].size(), data);
}

TEST(Knn, CosineExample) {
  const float h = static_cast<float>(1.0 / std::sqrt(2.0));
  const EmbeddingMatrix ref = matrix({{1, 0}, {0, 1}, {h, h}});
  const NeighborList got = knn_query(ref, V{1, 0}, 2, Metric::kCosine);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].index, 0);
  EXPECT_NEAR(got[0].distance, 0.0, 1e-12);
  EXPECT_EQ(got[1].index, 2);
  EXPECT_NEAR(got[1].distance, 1.0 - 1.0 / std::sqrt(2.0), 1e-7);
}

TEST(Knn, ExcludesSelf) {
  const float h = static_cast<float>(1.0 / std::sqrt(2.0));
  const EmbeddingMatrix ref = matrix({{1, 0}, {0, 1}, {h, h}});
  const NeighborList got = knn_query(ref, ref.row(0), 1, Metric::kCosine, 0);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].index, 2);
  EXPECT_NEAR(got[0].distance, 0.29289, 1e-5);
}

TEST(Knn, TiesBreakByLowerIndex) {
  const EmbeddingMatrix ref = matrix({{0, 1}, {1, 0}, {0, -1}, {-1, 0}});
  const NeighborList got = knn_query(ref, V{1, 1}, 4, Metric::kEuclidean);
  std::vector<std::int64_t> order;
  for (const auto& n : got) order.push_back(n.index);
  EXPECT_EQ(order, (std::vector<std::int64_t>{0, 1, 2, 3}));
}

TEST(Knn, InsufficientNeighbors) {
  const EmbeddingMatrix ref = matrix({{1, 0}, {0, 1}});
  EXPECT_THROW(knn_query(ref, V{1, 0}, 3, Metric::kCosine), ValidationError);
  EXPECT_THROW(knn_query(ref, V{1, 0}, 2, Metric::kCosine, 0), ValidationError);
  EXPECT_THROW(knn_query(ref, V{1, 0}, 0, Metric::kCosine), ValidationError);
}

TEST(Knn, MatchesFullSortOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 20 + rng.below(60);
    std::vector<V> rows(n, V(4));
    for (auto& r : rows) {
      // Coarse values make exact distance ties common.
      for (auto& x : r) x = static_cast<float>(static_cast<int>(rng.below(5)) - 2);
      if (std::all_of(r.begin(), r.end(), [](float x) { return x == 0; })) r[0] = 1;
    }
    const EmbeddingMatrix ref = matrix(rows);
    for (Metric metric : {Metric::kCosine, Metric::kEuclidean}) {
      const std::size_t q = rng.below(n);
      const std::size_t k = 1 + rng.below(n - 1);
      const MetricSpace space = MetricSpace::embeddings(ref, metric);
      std::vector<std::pair<double, std::size_t>> all;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == q) continue;
        all.push_back({space.distance(q, j), j});
      }
      std::sort(all.begin(), all.end());
      const NeighborList got = knn_query(ref, ref.row(q), k, metric, q);
      ASSERT_EQ(got.size(), k);
      for (std::size_t i = 0; i < k; ++i) {
        EXPECT_EQ(got[i].index, static_cast<std::int64_t>(all[i].second));
        EXPECT_EQ(got[i].distance, all[i].first);
      }
    }
  }
}

TEST(Knn, PoolRestrictsCandidates) {
  const EmbeddingMatrix ref = matrix({{1, 0}, {0.9f, 0.1f}, {0, 1}, {0.1f, 0.9f}});
  const MetricSpace space = MetricSpace::embeddings(ref, Metric::kCosine);
  const std::vector<std::size_t> pool{2, 3};
  const NeighborList got = knn_query(space, pool, space.external(V{1, 0}), 1);
  EXPECT_EQ(got[0].index, 3);
}

TEST(Knn, LabelSpace) {
  const MetricSpace space = MetricSpace::labels({0, 1, 0, 2});
  const std::vector<std::size_t> pool{0, 1, 2, 3};
  const NeighborList got = knn_query(space, pool, space.external_label(0), 2);
  EXPECT_EQ(got[0].index, 0);
  EXPECT_EQ(got[1].index, 2);
  EXPECT_EQ(got[1].distance, 0.0);
}

TEST(MmCache, Examples) {
  Dataset ds = testing::make_dataset({{1, 0}, {1, 0}}, {{1, 0}, {0, 1}});
  const auto mm = cache_mm_distances(ds);
  EXPECT_DOUBLE_EQ(mm[0], 0.0);
  EXPECT_DOUBLE_EQ(mm[1], 1.0);
}

TEST(MmCache, MatchesElementwiseCosine) {
  const Dataset ds = testing::random_dataset(4, 3, 21);
  const auto mm = cache_mm_distances(ds);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(mm[i], cosine_distance(ds.image_embeddings.row(i),
                                     ds.text_embeddings.row(i)));
  }
}

TEST(KMeans, TwoSeparatedRows) {
  const auto ids = kmeans_text_clusters(matrix({{0, 0.1f}, {10, 10}}), 2, 0);
  EXPECT_NE(ids[0], ids[1]);
}

TEST(KMeans, SingleCluster) {
  const Dataset ds = testing::random_dataset(30, 3, 1);
  for (int id : kmeans_text_clusters(ds.text_embeddings, 1, 5)) EXPECT_EQ(id, 0);
}

TEST(KMeans, RecoversBlobs) {
  Rng rng(8);
  const std::vector<V> centers{{0, 0}, {10, 0}, {5, 8.660254f}};
  std::vector<V> rows;
  std::vector<int> truth;
  for (int i = 0; i < 90; ++i) {
    const int c = i % 3;
    rows.push_back({centers[c][0] + static_cast<float>(0.01 * rng.normal()),
                    centers[c][1] + static_cast<float>(0.01 * rng.normal())});
    truth.push_back(c);
  }
  for (std::uint64_t seed : {0, 1, 2, 3}) {
    const auto ids = kmeans_text_clusters(matrix(rows), 3, seed);
    // Same partition up to relabeling.
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows.size(); ++j) {
        ASSERT_EQ(ids[i] == ids[j], truth[i] == truth[j]);
      }
    }
  }
}

TEST(KMeans, DeterministicAcrossThreads) {
  const Dataset ds = testing::random_dataset(200, 6, 2);
  EXPECT_EQ(kmeans_text_clusters(ds.text_embeddings, 7, 3, 1),
            kmeans_text_clusters(ds.text_embeddings, 7, 3, 4));
}

TEST(KMeans, TooManyClustersRejected) {
  EXPECT_THROW(kmeans_text_clusters(matrix({{1, 0}, {0, 1}}), 3, 0),
               ValidationError);
  EXPECT_THROW(kmeans_text_clusters(matrix({{1, 0}, {0, 1}}), 0, 0),
               ValidationError);
}

}  // namespace
}  // namespace lemon
