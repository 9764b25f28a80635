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

#ifndef LEMON_TUNING_H_
#define LEMON_TUNING_H_

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "lemon/dataset.h"
#include "lemon/scoring.h"

namespace lemon {

// k = 30, beta = gamma = 5, tau1 = 0.1, tau2 = 5, cosine on both sides.
LemonParams lemon_fix_params();

enum class TuneProvenance { kFixed, kGrid, kSimplex };

std::string_view provenance_name(TuneProvenance p);

struct Trial {
  LemonParams params;
  double val_f1 = 0.0;
  TuneProvenance provenance = TuneProvenance::kGrid;
};

struct TuneResult {
  LemonParams best_params;
  double best_val_f1 = 0.0;
  TuneProvenance provenance = TuneProvenance::kGrid;
  std::vector<Trial> trials;
};

// (tau1_n, tau2_n, tau1_m, tau2_m)
using TauCombo = std::array<double, 4>;

struct GridSpec {
  std::vector<int> ks;
  std::vector<Metric> metrics;  // applied to d_X, and to d_Y unless discrete
  std::vector<double> betas;
  std::vector<double> gammas;
  std::vector<TauCombo> taus;

  // k in {1,2,5,10,15,20,30,50}, cosine/euclidean, beta and gamma in
  // {0, 5, ..., 100}. The coarse grid ties tau1_n = tau1_m and
  // tau2_n = tau2_m (16 combos); the full grid crosses all four (256).
  static GridSpec standard(bool full_grid = false);
};

struct TuneOptions {
  // Use the discrete class metric for d_Y (classification data).
  bool discrete_labels = false;
  Split reference_split = Split::kTrain;
  int threads = 1;
};

// Lexicographic order on (k, dX, dY, beta, gamma, tau1_n, tau2_n, tau1_m,
// tau2_m); used to break validation-F1 ties.
bool params_less(const LemonParams& a, const LemonParams& b);

// Validation F1 of every grid point. Neighborhoods are computed once per
// metric at the largest k and shared across all (k, beta, gamma, tau).
TuneResult grid_search(const Dataset& dataset, Split val_split,
                       const GridSpec& grid, const TuneOptions& options = {});

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
};

// Nelder-Mead maximization: reflection 1, expansion 2, contraction 0.5,
// shrink 0.5. The start simplex is x0 plus x0 + 0.5 e_i. Stops when the
// spread of objective values drops below 1e-6 or after 500 iterations and
// returns the best vertex seen. Non-finite objective values count as -inf.
SimplexResult simplex_optimize(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> x0);

// For every (k, metric): a simplex run over (beta, gamma, tau1_n, tau2_n,
// tau1_m, tau2_m) from all-ones plus the coarse grid; the fixed preset is
// always a candidate. The winner maximizes validation F1.
TuneResult tune_lemon(const Dataset& dataset, Split val_split,
                      const TuneOptions& options = {}, bool full_grid = false);

// Validation F1 of one parameter set, scored from scratch.
double validation_f1(const Dataset& dataset, Split val_split,
                     const LemonParams& params, const TuneOptions& options = {});

std::string tune_result_to_json(const TuneResult& result);

}  // namespace lemon

#endif  // LEMON_TUNING_H_
