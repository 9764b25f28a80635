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

#include "lemon/metrics.h"

#include <algorithm>
#include <numeric>
#include <vector>

#include "json.hpp"
#include "lemon/common.h"

namespace lemon {
namespace {

struct Counts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

Counts check_inputs(std::span<const double> scores,
                    std::span<const bool> flags) {
  if (scores.size() != flags.size()) {
    throw ValidationError("scores and flags differ in length");
  }
  Counts c;
  for (bool f : flags) f ? ++c.pos : ++c.neg;
  return c;
}

// Indices sorted by descending score; ties by index to keep output stable.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const bool> flags) {
  const Counts c = check_inputs(scores, flags);
  if (c.pos == 0 || c.neg == 0) {
    throw ValidationError("AUROC needs both mislabeled and clean samples");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Sum of mid-ranks of the positives (1-based), exact in double for any
  // realistic n since every value is a multiple of 1/2.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (flags[order[t]]) rank_sum += mid_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(c.pos);
  const double nn = static_cast<double>(c.neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double auprc(std::span<const double> scores, std::span<const bool> flags,
             bool positive_is_mislabel) {
  const Counts c = check_inputs(scores, flags);
  if (c.pos == 0 || c.neg == 0) {
    throw ValidationError("AUPRC needs both mislabeled and clean samples");
  }
  std::vector<double> s(scores.begin(), scores.end());
  std::vector<bool> positive(flags.begin(), flags.end());
  if (!positive_is_mislabel) {
    for (auto& v : s) v = -v;
    positive.flip();
  }
  const double total_pos =
      static_cast<double>(positive_is_mislabel ? c.pos : c.neg);
  const std::vector<std::size_t> order = descending_order(s);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t taken = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && s[order[j]] == s[order[i]]) {
      if (positive[order[j]]) ++tp;
      ++j;
    }
    taken = j;
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision =
        static_cast<double>(tp) / static_cast<double>(taken);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

F1Result best_f1(std::span<const double> scores, std::span<const bool> flags) {
  const Counts c = check_inputs(scores, flags);
  if (c.pos == 0) throw ValidationError("F1 needs at least one mislabeled sample");
  const std::vector<std::size_t> order = descending_order(scores);
  F1Result best{-1.0, 0.0};
  std::size_t tp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (flags[order[j]]) ++tp;
      ++j;
    }
    // Predicted positives are the first j samples.
    const double f1 = 2.0 * static_cast<double>(tp) /
                      static_cast<double>(j + c.pos);
    if (f1 >= best.f1) best = {f1, scores[order[i]]};
    i = j;
  }
  return best;
}

MetricsReport evaluate_scores(std::span<const double> scores,
                              std::span<const bool> flags) {
  MetricsReport r;
  const Counts c = check_inputs(scores, flags);
  r.n_pos = c.pos;
  r.n_neg = c.neg;
  r.auroc = auroc(scores, flags);
  r.auprc_pos = auprc(scores, flags, true);
  r.auprc_neg = auprc(scores, flags, false);
  r.auprc_macro = 0.5 * (r.auprc_pos + r.auprc_neg);
  const F1Result f1 = best_f1(scores, flags);
  r.f1_max = f1.f1;
  r.f1_threshold = f1.threshold;
  return r;
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["auroc"] = r.auroc;
  j["auprc_pos"] = r.auprc_pos;
  j["auprc_neg"] = r.auprc_neg;
  j["auprc_macro"] = r.auprc_macro;
  j["f1_max"] = r.f1_max;
  j["f1_threshold"] = r.f1_threshold;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  return j.dump(2) + "\n";
}

}  // namespace lemon
