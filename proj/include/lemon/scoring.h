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

#ifndef LEMON_SCORING_H_
#define LEMON_SCORING_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lemon/dataset.h"
#include "lemon/geometry.h"

namespace lemon {

// Hyperparameters of the multimodal-neighbor score. No sign constraints on
// the real-valued terms: the unbounded tuner may propose negatives.
struct LemonParams {
  int k = 30;
  double beta = 5.0;
  double gamma = 5.0;
  double tau1_n = 0.1;
  double tau2_n = 5.0;
  double tau1_m = 0.1;
  double tau2_m = 5.0;
  Metric dX_metric = Metric::kCosine;
  Metric dY_metric = Metric::kCosine;

  void validate() const;
  bool operator==(const LemonParams&) const = default;
};

// JSON document with the field names above; absent fields keep defaults.
std::string params_to_json(const LemonParams& params);
LemonParams params_from_json(std::string_view json);

// One neighbor's contribution inputs. For image-space neighbors `own` is
// d_X(x, x_j) and `cross` is d_Y(y, y_j); text-space neighbors swap roles.
struct NeighborTerm {
  std::int64_t index = 0;
  double own = 0.0;
  double cross = 0.0;
  double neighbor_mm = 0.0;
};

// Everything the score needs about one query, computed for some k_max.
// Any k <= k_max reuses the prefix of each side.
struct Neighborhood {
  double d_mm = 0.0;
  std::vector<NeighborTerm> image_side;
  std::vector<NeighborTerm> text_side;
};

// A query given by raw vectors instead of a dataset row.
struct ExternalQuery {
  std::vector<float> image;
  std::vector<float> text;
  std::optional<int> class_id;
};

// Reference split of a dataset indexed for neighbor queries, with the
// per-sample multimodal distances cached once.
class ScoringContext {
 public:
  // `text_labels` backs a discrete d_Y; defaults to class_id, which must then
  // be present on every record.
  ScoringContext(const Dataset& dataset, Split reference_split, Metric dX,
                 Metric dY,
                 std::optional<std::vector<int>> text_labels = std::nullopt);

  const Dataset& dataset() const { return *dataset_; }
  Split reference_split() const { return reference_split_; }
  const std::vector<std::size_t>& pool() const { return pool_; }
  const MetricSpace& image_space() const { return image_space_; }
  const MetricSpace& text_space() const { return text_space_; }
  const std::vector<double>& mm() const { return mm_; }

  // Self-exclusion applies only when the row belongs to the reference split.
  std::optional<std::size_t> exclusion(std::size_t row) const;

  Neighborhood neighborhood(std::size_t row, std::size_t k_max) const;
  Neighborhood neighborhood(const ExternalQuery& query,
                            std::size_t k_max) const;

  // Query points for either a dataset row or an external query.
  struct Query {
    QueryPoint image;
    QueryPoint text;
    double d_mm = 0.0;
    std::optional<std::size_t> exclude;
  };
  Query query(std::size_t row) const;
  Query query(const ExternalQuery& q) const;

  Neighborhood neighborhood(const Query& q, std::size_t k_max) const;

 private:
  const Dataset* dataset_;
  Split reference_split_;
  std::vector<std::size_t> pool_;
  std::vector<double> mm_;
  MetricSpace image_space_;
  MetricSpace text_space_;
};

// d_mm + beta * s_n + gamma * s_m over the first params.k neighbors.
ScoreBreakdown combine_lemon(const Neighborhood& hood, const LemonParams& params);

ScoreBreakdown score_lemon(const ScoringContext& ctx, std::size_t row,
                           const LemonParams& params);
ScoreBreakdown score_lemon(const ScoringContext& ctx,
                           const ExternalQuery& query,
                           const LemonParams& params);

double score_clip_similarity(const Dataset& dataset, std::size_t row);
double score_clip_similarity(std::span<const float> image,
                             std::span<const float> text);

// 1 - fraction of the k image-space neighbors sharing the query's label.
double score_deep_knn(const ScoringContext& ctx, std::size_t row,
                      std::size_t k, const std::vector<int>& labels);

// Mean image distance to second-degree text-space neighbors.
double score_discrepancy(const ScoringContext& ctx, std::size_t row,
                         std::size_t k);
double score_discrepancy(const ScoringContext& ctx, const ExternalQuery& query,
                         std::size_t k);

struct MethodConfig {
  LemonParams params;
  int num_text_clusters = 100;
  std::uint64_t cluster_seed = 0;
};

// Discrete labels for deep k-NN: class_id when every record has one,
// otherwise k-means clusters of the text embeddings.
std::vector<int> discrete_labels(const Dataset& dataset, int num_clusters,
                                 std::uint64_t seed, int threads = 1);

// Scores every record of `query_split` against `reference_split` with one of
// lemon, clip-sim, deep-knn, discrepancy. Rows come back in index order.
ScoreTable score_split(const Dataset& dataset, Split reference_split,
                       Split query_split, std::string_view method,
                       const MethodConfig& config, int threads = 1);

}  // namespace lemon

#endif  // LEMON_SCORING_H_
