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

#ifndef LEMON_METRICS_H_
#define LEMON_METRICS_H_

#include <cstddef>
#include <span>
#include <string>

namespace lemon {

struct MetricsReport {
  double auroc = 0.0;
  double auprc_pos = 0.0;  // mislabeled samples as the positive class
  double auprc_neg = 0.0;  // clean samples as the positive class
  double auprc_macro = 0.0;
  double f1_max = 0.0;
  double f1_threshold = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// Probability that a random mislabeled sample outscores a random clean one,
// ties counted as 1/2. Rank-sum form, O(n log n).
double auroc(std::span<const double> scores, std::span<const bool> flags);

// Non-interpolated average precision, sum (R_i - R_{i-1}) P_i over distinct
// descending thresholds. With positive_is_mislabel=false the clean samples
// are the positives and scores are negated.
double auprc(std::span<const double> scores, std::span<const bool> flags,
             bool positive_is_mislabel = true);

struct F1Result {
  double f1 = 0.0;
  double threshold = 0.0;
};

// Max F1 over thresholds t drawn from the scores, predicting mislabel iff
// score >= t. Returns the smallest threshold that attains the max.
F1Result best_f1(std::span<const double> scores, std::span<const bool> flags);

MetricsReport evaluate_scores(std::span<const double> scores,
                              std::span<const bool> flags);

std::string metrics_to_json(const MetricsReport& report);

}  // namespace lemon

#endif  // LEMON_METRICS_H_
