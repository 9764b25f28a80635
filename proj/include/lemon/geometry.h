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

#ifndef LEMON_GEOMETRY_H_
#define LEMON_GEOMETRY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lemon/dataset.h"

namespace lemon {

enum class Metric { kCosine, kEuclidean, kDiscrete };

std::string_view metric_name(Metric metric);
Metric parse_metric(std::string_view name);

// 1 - u.v / (|u| |v|), clamped to [0, 2]. Throws on zero vectors.
double cosine_distance(std::span<const float> u, std::span<const float> v);
// L2 distance on the raw vectors.
double euclidean_distance(std::span<const float> u, std::span<const float> v);
// 0 when the labels agree, 1 otherwise.
double discrete_distance(int a, int b);

namespace detail {
double dot(std::span<const float> u, std::span<const float> v);
double norm(std::span<const float> u);
double cosine_from_parts(double dot, double norm_u, double norm_v);
}  // namespace detail

struct Neighbor {
  std::int64_t index = 0;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// Ascending by distance, ties by ascending index.
using NeighborList = std::vector<Neighbor>;

// A point to measure from: an embedding (with cached norm) or a label.
struct QueryPoint {
  std::span<const float> vec;
  double norm = 0.0;
  std::optional<int> label;
};

// The rows of one modality under one metric. Embedding spaces cache row
// norms so cosine distances are computed exactly as cosine_distance does.
class MetricSpace {
 public:
  static MetricSpace embeddings(const EmbeddingMatrix& matrix, Metric metric);
  static MetricSpace labels(std::vector<int> labels);

  Metric metric() const { return metric_; }
  std::size_t size() const { return size_; }

  QueryPoint point(std::size_t row) const;
  QueryPoint external(std::span<const float> vec) const;
  QueryPoint external_label(int label) const;

  double distance(const QueryPoint& q, std::size_t row) const;
  double distance(std::size_t a, std::size_t b) const {
    return distance(point(a), b);
  }

 private:
  MetricSpace() = default;

  Metric metric_ = Metric::kCosine;
  std::size_t size_ = 0;
  const EmbeddingMatrix* matrix_ = nullptr;
  std::vector<double> norms_;
  std::vector<int> labels_;
};

// Exact k nearest neighbors of `q` among `pool` (row indices of `space`),
// skipping `exclude`. Throws ValidationError when fewer than k candidates
// remain.
NeighborList knn_query(const MetricSpace& space,
                       std::span<const std::size_t> pool, const QueryPoint& q,
                       std::size_t k,
                       std::optional<std::size_t> exclude = std::nullopt);

// Convenience form over every row of `reference`.
NeighborList knn_query(const EmbeddingMatrix& reference,
                       std::span<const float> query, std::size_t k,
                       Metric metric,
                       std::optional<std::size_t> exclude = std::nullopt);

// Cosine distance between each sample's image and text embedding. Always
// cosine, whatever metric the neighbor terms use.
std::vector<double> cache_mm_distances(const Dataset& dataset);

// Lloyd k-means with farthest-point seeding from `seed`. Euclidean on raw
// rows, at most 100 iterations.
std::vector<int> kmeans_text_clusters(const EmbeddingMatrix& text,
                                      int num_clusters, std::uint64_t seed,
                                      int threads = 1);

}  // namespace lemon

#endif  // LEMON_GEOMETRY_H_
