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

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace lemon {
namespace {

using Json = nlohmann::ordered_json;

// Keeps exp() finite for any tuner-proposed temperature.
double guarded_exp(double exponent) {
  return std::exp(std::clamp(exponent, -700.0, 700.0));
}

MetricSpace make_text_space(const Dataset& dataset, Metric dY,
                            std::optional<std::vector<int>> labels) {
  if (dY != Metric::kDiscrete) {
    return MetricSpace::embeddings(dataset.text_embeddings, dY);
  }
  if (labels) {
    if (labels->size() != dataset.size()) {
      throw ValidationError("text label vector has " +
                            std::to_string(labels->size()) + " entries for " +
                            std::to_string(dataset.size()) + " records");
    }
    return MetricSpace::labels(std::move(*labels));
  }
  std::vector<int> ids(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset.records[i].class_id) {
      throw ValidationError("discrete d_Y needs class_id on every record; "
                            "record " + std::to_string(i) + " has none");
    }
    ids[i] = *dataset.records[i].class_id;
  }
  return MetricSpace::labels(std::move(ids));
}

MetricSpace make_image_space(const Dataset& dataset, Metric dX) {
  if (dX == Metric::kDiscrete) {
    throw ValidationError("d_X must be cosine or euclidean");
  }
  return MetricSpace::embeddings(dataset.image_embeddings, dX);
}

}  // namespace

void LemonParams::validate() const {
  if (k < 1) throw ValidationError("k must be >= 1, got " + std::to_string(k));
  for (double v : {beta, gamma, tau1_n, tau2_n, tau1_m, tau2_m}) {
    if (!std::isfinite(v)) throw ValidationError("non-finite hyperparameter");
  }
  if (dX_metric == Metric::kDiscrete) {
    throw ValidationError("dX_metric must be cosine or euclidean");
  }
}

std::string params_to_json(const LemonParams& p) {
  Json j;
  j["k"] = p.k;
  j["beta"] = p.beta;
  j["gamma"] = p.gamma;
  j["tau1_n"] = p.tau1_n;
  j["tau2_n"] = p.tau2_n;
  j["tau1_m"] = p.tau1_m;
  j["tau2_m"] = p.tau2_m;
  j["dX_metric"] = std::string(metric_name(p.dX_metric));
  j["dY_metric"] = std::string(metric_name(p.dY_metric));
  return j.dump(2) + "\n";
}

LemonParams params_from_json(std::string_view text) {
  LemonParams p;
  try {
    const Json j = Json::parse(text);
    if (!j.is_object()) throw ValidationError("params: expected a JSON object");
    p.k = j.value("k", p.k);
    p.beta = j.value("beta", p.beta);
    p.gamma = j.value("gamma", p.gamma);
    p.tau1_n = j.value("tau1_n", p.tau1_n);
    p.tau2_n = j.value("tau2_n", p.tau2_n);
    p.tau1_m = j.value("tau1_m", p.tau1_m);
    p.tau2_m = j.value("tau2_m", p.tau2_m);
    if (j.contains("dX_metric")) {
      p.dX_metric = parse_metric(j.at("dX_metric").get<std::string>());
    }
    if (j.contains("dY_metric")) {
      p.dY_metric = parse_metric(j.at("dY_metric").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("params: ") + e.what());
  }
  p.validate();
  return p;
}

ScoringContext::ScoringContext(const Dataset& dataset, Split reference_split,
                               Metric dX, Metric dY,
                               std::optional<std::vector<int>> text_labels)
    : dataset_(&dataset),
      reference_split_(reference_split),
      pool_(dataset.split_indices(reference_split)),
      mm_(cache_mm_distances(dataset)),
      image_space_(make_image_space(dataset, dX)),
      text_space_(make_text_space(dataset, dY, std::move(text_labels))) {
  if (pool_.empty()) {
    throw ValidationError("reference split '" +
                          std::string(split_name(reference_split)) +
                          "' has no records");
  }
}

std::optional<std::size_t> ScoringContext::exclusion(std::size_t row) const {
  if (dataset_->records[row].split == reference_split_) return row;
  return std::nullopt;
}

ScoringContext::Query ScoringContext::query(std::size_t row) const {
  return {image_space_.point(row), text_space_.point(row), mm_[row],
          exclusion(row)};
}

ScoringContext::Query ScoringContext::query(const ExternalQuery& q) const {
  Query out;
  out.image = image_space_.external(q.image);
  if (text_space_.metric() == Metric::kDiscrete) {
    if (!q.class_id) {
      throw ValidationError("discrete d_Y needs a class_id on the query");
    }
    out.text = text_space_.external_label(*q.class_id);
  } else {
    out.text = text_space_.external(q.text);
  }
  out.d_mm = score_clip_similarity(q.image, q.text);
  return out;
}

Neighborhood ScoringContext::neighborhood(const Query& q,
                                          std::size_t k_max) const {
  Neighborhood hood;
  hood.d_mm = q.d_mm;
  const NeighborList by_image =
      knn_query(image_space_, pool_, q.image, k_max, q.exclude);
  hood.image_side.reserve(by_image.size());
  for (const Neighbor& nb : by_image) {
    const auto j = static_cast<std::size_t>(nb.index);
    hood.image_side.push_back(
        {nb.index, nb.distance, text_space_.distance(q.text, j), mm_[j]});
  }
  const NeighborList by_text =
      knn_query(text_space_, pool_, q.text, k_max, q.exclude);
  hood.text_side.reserve(by_text.size());
  for (const Neighbor& nb : by_text) {
    const auto j = static_cast<std::size_t>(nb.index);
    hood.text_side.push_back(
        {nb.index, nb.distance, image_space_.distance(q.image, j), mm_[j]});
  }
  return hood;
}

Neighborhood ScoringContext::neighborhood(std::size_t row,
                                          std::size_t k_max) const {
  return neighborhood(query(row), k_max);
}

Neighborhood ScoringContext::neighborhood(const ExternalQuery& q,
                                          std::size_t k_max) const {
  return neighborhood(query(q), k_max);
}

ScoreBreakdown combine_lemon(const Neighborhood& hood,
                             const LemonParams& params) {
  const auto k = static_cast<std::size_t>(params.k);
  if (k < 1 || hood.image_side.size() < k || hood.text_side.size() < k) {
    throw ValidationError("neighborhood holds fewer than k=" +
                          std::to_string(params.k) + " neighbors");
  }
  double sum_n = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const NeighborTerm& t = hood.image_side[j];
    sum_n += t.cross * guarded_exp(-params.tau1_n * t.own) *
             guarded_exp(-params.tau2_n * t.neighbor_mm);
  }
  double sum_m = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const NeighborTerm& t = hood.text_side[j];
    sum_m += t.cross * guarded_exp(-params.tau1_m * t.own) *
             guarded_exp(-params.tau2_m * t.neighbor_mm);
  }
  ScoreBreakdown out;
  out.d_mm = hood.d_mm;
  out.s_n = sum_n / static_cast<double>(k);
  out.s_m = sum_m / static_cast<double>(k);
  out.s = out.d_mm + params.beta * out.s_n + params.gamma * out.s_m;
  return out;
}

ScoreBreakdown score_lemon(const ScoringContext& ctx, std::size_t row,
                           const LemonParams& params) {
  params.validate();
  return combine_lemon(
      ctx.neighborhood(row, static_cast<std::size_t>(params.k)), params);
}

ScoreBreakdown score_lemon(const ScoringContext& ctx,
                           const ExternalQuery& query,
                           const LemonParams& params) {
  params.validate();
  return combine_lemon(
      ctx.neighborhood(query, static_cast<std::size_t>(params.k)), params);
}

double score_clip_similarity(const Dataset& dataset, std::size_t row) {
  return score_clip_similarity(dataset.image_embeddings.row(row),
                               dataset.text_embeddings.row(row));
}

double score_clip_similarity(std::span<const float> image,
                             std::span<const float> text) {
  return cosine_distance(image, text);
}

double score_deep_knn(const ScoringContext& ctx, std::size_t row,
                      std::size_t k, const std::vector<int>& labels) {
  if (labels.size() != ctx.dataset().size()) {
    throw ValidationError("deep k-NN needs one label per record");
  }
  const NeighborList nbs = knn_query(ctx.image_space(), ctx.pool(),
                                     ctx.image_space().point(row), k,
                                     ctx.exclusion(row));
  std::size_t disagree = 0;
  for (const Neighbor& nb : nbs) {
    if (labels[static_cast<std::size_t>(nb.index)] != labels[row]) ++disagree;
  }
  return static_cast<double>(disagree) / static_cast<double>(k);
}

namespace {

double discrepancy(const ScoringContext& ctx, const ScoringContext::Query& q,
                   std::size_t k) {
  const MetricSpace& text = ctx.text_space();
  const NeighborList first = knn_query(text, ctx.pool(), q.text, k, q.exclude);
  std::set<std::size_t> second;
  for (const Neighbor& hop : first) {
    const auto j = static_cast<std::size_t>(hop.index);
    for (const Neighbor& nb : knn_query(text, ctx.pool(), text.point(j), k, j)) {
      const auto m = static_cast<std::size_t>(nb.index);
      if (q.exclude && m == *q.exclude) continue;
      second.insert(m);
    }
  }
  if (second.empty()) {
    throw ValidationError("discrepancy: empty second-degree neighborhood");
  }
  double total = 0.0;
  for (std::size_t m : second) total += ctx.image_space().distance(q.image, m);
  return total / static_cast<double>(second.size());
}

}  // namespace

double score_discrepancy(const ScoringContext& ctx, std::size_t row,
                         std::size_t k) {
  return discrepancy(ctx, ctx.query(row), k);
}

double score_discrepancy(const ScoringContext& ctx, const ExternalQuery& query,
                         std::size_t k) {
  return discrepancy(ctx, ctx.query(query), k);
}

std::vector<int> discrete_labels(const Dataset& dataset, int num_clusters,
                                 std::uint64_t seed, int threads) {
  const bool all_labeled =
      !dataset.records.empty() &&
      std::all_of(dataset.records.begin(), dataset.records.end(),
                  [](const SampleRecord& r) { return r.class_id.has_value(); });
  if (all_labeled) {
    std::vector<int> ids;
    ids.reserve(dataset.size());
    for (const SampleRecord& r : dataset.records) ids.push_back(*r.class_id);
    return ids;
  }
  const int clusters =
      std::min<int>(num_clusters, static_cast<int>(dataset.size()));
  return kmeans_text_clusters(dataset.text_embeddings, clusters, seed, threads);
}

ScoreTable score_split(const Dataset& dataset, Split reference_split,
                       Split query_split, std::string_view method,
                       const MethodConfig& config, int threads) {
  const LemonParams& params = config.params;
  params.validate();
  const std::vector<std::size_t> queries = dataset.split_indices(query_split);
  if (queries.empty()) {
    throw ValidationError("query split '" +
                          std::string(split_name(query_split)) +
                          "' has no records");
  }
  const auto k = static_cast<std::size_t>(params.k);
  ScoreTable table(queries.size());
  auto emit = [&](std::size_t slot, double score,
                  std::optional<ScoreBreakdown> breakdown) {
    table[slot] = {static_cast<std::int64_t>(queries[slot]),
                   std::string(method), score, breakdown};
  };

  if (method == "lemon") {
    const ScoringContext ctx(dataset, reference_split, params.dX_metric,
                             params.dY_metric);
    parallel_for(queries.size(), threads, [&](std::size_t i) {
      const ScoreBreakdown b =
          combine_lemon(ctx.neighborhood(queries[i], k), params);
      emit(i, b.s, b);
    });
  } else if (method == "clip-sim") {
    const std::vector<double> mm = cache_mm_distances(dataset);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      emit(i, mm[queries[i]], std::nullopt);
    }
  } else if (method == "deep-knn") {
    const std::vector<int> labels = discrete_labels(
        dataset, config.num_text_clusters, config.cluster_seed, threads);
    const ScoringContext ctx(dataset, reference_split, params.dX_metric,
                             Metric::kDiscrete, labels);
    parallel_for(queries.size(), threads, [&](std::size_t i) {
      emit(i, score_deep_knn(ctx, queries[i], k, labels), std::nullopt);
    });
  } else if (method == "discrepancy") {
    const ScoringContext ctx(dataset, reference_split, params.dX_metric,
                             params.dY_metric);
    parallel_for(queries.size(), threads, [&](std::size_t i) {
      emit(i, score_discrepancy(ctx, queries[i], k), std::nullopt);
    });
  } else {
    throw ValidationError("unknown method '" + std::string(method) +
                          "' (expected lemon, clip-sim, deep-knn, discrepancy)");
  }
  return table;
}

}  // namespace lemon
