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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lemon/rng.h"

namespace lemon {
namespace detail {

double dot(std::span<const float> u, std::span<const float> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  }
  return acc;
}

double norm(std::span<const float> u) { return std::sqrt(dot(u, u)); }

double cosine_from_parts(double dot, double norm_u, double norm_v) {
  const double d = 1.0 - dot / (norm_u * norm_v);
  return std::clamp(d, 0.0, 2.0);
}

}  // namespace detail

namespace {

void check_dims(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw ValidationError("dimension mismatch: " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
  }
}

bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.index < b.index;
}

}  // namespace

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kCosine:
      return "cosine";
    case Metric::kEuclidean:
      return "euclidean";
    case Metric::kDiscrete:
      return "discrete";
  }
  return "cosine";
}

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "discrete") return Metric::kDiscrete;
  throw ValidationError("unknown distance metric '" + std::string(name) + "'");
}

double cosine_distance(std::span<const float> u, std::span<const float> v) {
  check_dims(u, v);
  const double nu = detail::norm(u);
  const double nv = detail::norm(v);
  if (nu == 0.0 || nv == 0.0) {
    throw ValidationError("cosine distance of a zero vector is undefined");
  }
  return detail::cosine_from_parts(detail::dot(u, v), nu, nv);
}

double euclidean_distance(std::span<const float> u, std::span<const float> v) {
  check_dims(u, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

double discrete_distance(int a, int b) { return a == b ? 0.0 : 1.0; }

MetricSpace MetricSpace::embeddings(const EmbeddingMatrix& matrix,
                                    Metric metric) {
  if (metric == Metric::kDiscrete) {
    throw ValidationError("discrete metric needs class labels, not embeddings");
  }
  MetricSpace space;
  space.metric_ = metric;
  space.size_ = matrix.rows();
  space.matrix_ = &matrix;
  if (metric == Metric::kCosine) {
    space.norms_.resize(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
      space.norms_[i] = detail::norm(matrix.row(i));
      if (space.norms_[i] == 0.0) {
        throw ValidationError("row " + std::to_string(i) +
                              " is a zero vector; cosine distance undefined");
      }
    }
  }
  return space;
}

MetricSpace MetricSpace::labels(std::vector<int> labels) {
  MetricSpace space;
  space.metric_ = Metric::kDiscrete;
  space.size_ = labels.size();
  space.labels_ = std::move(labels);
  return space;
}

QueryPoint MetricSpace::point(std::size_t row) const {
  if (metric_ == Metric::kDiscrete) return {{}, 0.0, labels_[row]};
  return {matrix_->row(row), norms_.empty() ? 0.0 : norms_[row], std::nullopt};
}

QueryPoint MetricSpace::external(std::span<const float> vec) const {
  if (metric_ == Metric::kDiscrete) {
    throw ValidationError("discrete space needs a label query");
  }
  if (vec.size() != matrix_->dim()) {
    throw ValidationError("dimension mismatch: query " +
                          std::to_string(vec.size()) + " vs reference " +
                          std::to_string(matrix_->dim()));
  }
  QueryPoint q{vec, 0.0, std::nullopt};
  if (metric_ == Metric::kCosine) {
    q.norm = detail::norm(vec);
    if (q.norm == 0.0) {
      throw ValidationError("cosine distance of a zero vector is undefined");
    }
  }
  return q;
}

QueryPoint MetricSpace::external_label(int label) const {
  if (metric_ != Metric::kDiscrete) {
    throw ValidationError("label query on an embedding space");
  }
  return {{}, 0.0, label};
}

double MetricSpace::distance(const QueryPoint& q, std::size_t row) const {
  switch (metric_) {
    case Metric::kCosine:
      return detail::cosine_from_parts(detail::dot(q.vec, matrix_->row(row)),
                                       q.norm, norms_[row]);
    case Metric::kEuclidean:
      return euclidean_distance(q.vec, matrix_->row(row));
    case Metric::kDiscrete:
      return discrete_distance(*q.label, labels_[row]);
  }
  return 0.0;
}

NeighborList knn_query(const MetricSpace& space,
                       std::span<const std::size_t> pool, const QueryPoint& q,
                       std::size_t k, std::optional<std::size_t> exclude) {
  if (k < 1) throw ValidationError("k must be at least 1");
  NeighborList candidates;
  candidates.reserve(pool.size());
  for (std::size_t row : pool) {
    if (exclude && row == *exclude) continue;
    candidates.push_back(
        {static_cast<std::int64_t>(row), space.distance(q, row)});
  }
  if (candidates.size() < k) {
    throw ValidationError("insufficient neighbors: k=" + std::to_string(k) +
                          " but only " + std::to_string(candidates.size()) +
                          " candidates after exclusion");
  }
  std::partial_sort(candidates.begin(),
                    candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), neighbor_less);
  candidates.resize(k);
  return candidates;
}

NeighborList knn_query(const EmbeddingMatrix& reference,
                       std::span<const float> query, std::size_t k,
                       Metric metric, std::optional<std::size_t> exclude) {
  const MetricSpace space = MetricSpace::embeddings(reference, metric);
  std::vector<std::size_t> pool(reference.rows());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  return knn_query(space, pool, space.external(query), k, exclude);
}

std::vector<double> cache_mm_distances(const Dataset& dataset) {
  const EmbeddingMatrix& img = dataset.image_embeddings;
  const EmbeddingMatrix& txt = dataset.text_embeddings;
  if (img.dim() != txt.dim()) {
    throw ValidationError(
        "image and text embeddings must share a space: dims " +
        std::to_string(img.dim()) + " vs " + std::to_string(txt.dim()));
  }
  std::vector<double> out(img.rows());
  for (std::size_t i = 0; i < img.rows(); ++i) {
    out[i] = cosine_distance(img.row(i), txt.row(i));
  }
  return out;
}

namespace {

double squared_l2(std::span<const float> row, const std::vector<double>& c) {
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double diff = static_cast<double>(row[j]) - c[j];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

std::vector<int> kmeans_text_clusters(const EmbeddingMatrix& text,
                                      int num_clusters, std::uint64_t seed,
                                      int threads) {
  if (num_clusters < 1) throw ValidationError("num_clusters must be >= 1");
  const std::size_t n = text.rows();
  const std::size_t clusters = static_cast<std::size_t>(num_clusters);
  if (clusters > n) {
    throw ValidationError("num_clusters " + std::to_string(num_clusters) +
                          " exceeds row count " + std::to_string(n));
  }
  const std::size_t dim = text.dim();
  auto row_as_centroid = [&](std::size_t i) {
    const auto r = text.row(i);
    return std::vector<double>(r.begin(), r.end());
  };

  // Farthest-point seeding: a seeded random first center, then repeatedly
  // the row farthest from every chosen center (lowest index on ties).
  std::vector<std::vector<double>> centroids;
  Rng rng(seed);
  centroids.push_back(row_as_centroid(rng.below(n)));
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    nearest[i] = squared_l2(text.row(i), centroids[0]);
  }
  while (centroids.size() < clusters) {
    const std::size_t far = static_cast<std::size_t>(
        std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    centroids.push_back(row_as_centroid(far));
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_l2(text.row(i), centroids.back()));
    }
  }

  std::vector<int> assign(n, -1);
  std::vector<int> next(n);
  for (int iter = 0; iter < 100; ++iter) {
    parallel_for(n, threads, [&](std::size_t i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < clusters; ++c) {
        const double d = squared_l2(text.row(i), centroids[c]);
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      next[i] = best_c;
    });
    if (next == assign) break;
    assign = next;
    std::vector<std::vector<double>> sums(clusters,
                                          std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = text.row(i);
      auto& sum = sums[static_cast<std::size_t>(assign[i])];
      for (std::size_t j = 0; j < dim; ++j) sum[j] += r[j];
      ++counts[static_cast<std::size_t>(assign[i])];
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its center
      for (std::size_t j = 0; j < dim; ++j) {
        centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
  }
  return assign;
}

}  // namespace lemon
