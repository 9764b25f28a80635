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

#include "lemon/tuning.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <tuple>

#include "json.hpp"
#include "lemon/metrics.h"

namespace lemon {
namespace {

constexpr double kSimplexStep = 0.5;
constexpr double kSimplexFtol = 1e-6;
constexpr int kSimplexMaxIter = 500;

auto params_key(const LemonParams& p) {
  return std::make_tuple(p.k, static_cast<int>(p.dX_metric),
                         static_cast<int>(p.dY_metric), p.beta, p.gamma,
                         p.tau1_n, p.tau2_n, p.tau1_m, p.tau2_m);
}

// True when `a` should replace the incumbent `b`.
bool better_trial(double f_a, const LemonParams& a, double f_b,
                  const LemonParams& b) {
  if (f_a != f_b) return f_a > f_b;
  return params_less(a, b);
}

std::vector<bool> val_flags(const Dataset& dataset,
                            const std::vector<std::size_t>& rows) {
  std::vector<bool> flags;
  flags.reserve(rows.size());
  std::size_t positives = 0;
  for (std::size_t i : rows) {
    const auto& flag = dataset.records[i].mislabel_flag;
    if (!flag) {
      throw ValidationError("validation record " + std::to_string(i) +
                            " has no mislabel_flag");
    }
    flags.push_back(*flag);
    if (*flag) ++positives;
  }
  if (positives == 0) {
    throw ValidationError("validation split has no mislabeled samples");
  }
  return flags;
}

double f1_of(const std::vector<double>& scores, const std::vector<bool>& flags) {
  // std::vector<bool> has no contiguous storage; copy for the span API.
  const std::unique_ptr<bool[]> buf(new bool[flags.size()]);
  std::copy(flags.begin(), flags.end(), buf.get());
  return best_f1(scores, std::span<const bool>(buf.get(), flags.size())).f1;
}

// Neighborhoods of every validation query under one (d_X, d_Y) pair.
struct HoodCache {
  Metric dX;
  Metric dY;
  std::vector<Neighborhood> hoods;
};

HoodCache build_cache(const Dataset& dataset, Split val_split, Metric dX,
                      Metric dY, std::size_t k_max,
                      const TuneOptions& options) {
  const ScoringContext ctx(dataset, options.reference_split, dX, dY);
  const auto rows = dataset.split_indices(val_split);
  HoodCache cache{dX, dY, std::vector<Neighborhood>(rows.size())};
  parallel_for(rows.size(), options.threads, [&](std::size_t i) {
    cache.hoods[i] = ctx.neighborhood(rows[i], k_max);
  });
  return cache;
}

std::vector<double> cached_scores(const HoodCache& cache,
                                  const LemonParams& params) {
  std::vector<double> scores(cache.hoods.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = combine_lemon(cache.hoods[i], params).s;
  }
  return scores;
}

Metric text_metric(Metric metric, const TuneOptions& options) {
  return options.discrete_labels ? Metric::kDiscrete : metric;
}

std::size_t available_neighbors(const Dataset& dataset, Split val_split,
                                const TuneOptions& options) {
  const std::size_t pool =
      dataset.split_indices(options.reference_split).size();
  return val_split == options.reference_split && pool > 0 ? pool - 1 : pool;
}

std::vector<Trial> grid_over_cache(const HoodCache& cache,
                                   const std::vector<bool>& flags,
                                   const GridSpec& grid,
                                   const std::vector<int>& ks, int threads) {
  const std::size_t per_combo = grid.betas.size() * grid.gammas.size();
  const std::size_t combos = ks.size() * grid.taus.size();
  std::vector<Trial> trials(combos * per_combo);
  parallel_for(combos, threads, [&](std::size_t c) {
    LemonParams base;
    base.k = ks[c / grid.taus.size()];
    const TauCombo& tau = grid.taus[c % grid.taus.size()];
    base.tau1_n = tau[0];
    base.tau2_n = tau[1];
    base.tau1_m = tau[2];
    base.tau2_m = tau[3];
    base.dX_metric = cache.dX;
    base.dY_metric = cache.dY;
    base.beta = 0.0;
    base.gamma = 0.0;
    std::vector<ScoreBreakdown> parts(cache.hoods.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      parts[i] = combine_lemon(cache.hoods[i], base);
    }
    std::vector<double> scores(parts.size());
    std::size_t slot = c * per_combo;
    for (double beta : grid.betas) {
      for (double gamma : grid.gammas) {
        for (std::size_t i = 0; i < parts.size(); ++i) {
          scores[i] = parts[i].d_mm + beta * parts[i].s_n + gamma * parts[i].s_m;
        }
        LemonParams p = base;
        p.beta = beta;
        p.gamma = gamma;
        trials[slot++] = {p, f1_of(scores, flags), TuneProvenance::kGrid};
      }
    }
  });
  return trials;
}

void pick_winner(TuneResult& result) {
  if (result.trials.empty()) throw ValidationError("no tuning candidates");
  const Trial* best = &result.trials.front();
  for (const Trial& t : result.trials) {
    if (better_trial(t.val_f1, t.params, best->val_f1, best->params)) best = &t;
  }
  result.best_params = best->params;
  result.best_val_f1 = best->val_f1;
  result.provenance = best->provenance;
}

std::vector<int> feasible_ks(const std::vector<int>& ks, std::size_t available) {
  std::vector<int> out;
  for (int k : ks) {
    if (k >= 1 && static_cast<std::size_t>(k) <= available) out.push_back(k);
  }
  if (out.empty()) {
    throw ValidationError("no k in the search grid fits the " +
                          std::to_string(available) + " available neighbors");
  }
  return out;
}

}  // namespace

LemonParams lemon_fix_params() {
  LemonParams p;
  p.k = 30;
  p.beta = 5.0;
  p.gamma = 5.0;
  p.tau1_n = 0.1;
  p.tau1_m = 0.1;
  p.tau2_n = 5.0;
  p.tau2_m = 5.0;
  p.dX_metric = Metric::kCosine;
  p.dY_metric = Metric::kCosine;
  return p;
}

std::string_view provenance_name(TuneProvenance p) {
  switch (p) {
    case TuneProvenance::kFixed:
      return "fixed";
    case TuneProvenance::kGrid:
      return "grid";
    case TuneProvenance::kSimplex:
      return "simplex";
  }
  return "grid";
}

bool params_less(const LemonParams& a, const LemonParams& b) {
  return params_key(a) < params_key(b);
}

GridSpec GridSpec::standard(bool full_grid) {
  GridSpec g;
  g.ks = {1, 2, 5, 10, 15, 20, 30, 50};
  g.metrics = {Metric::kCosine, Metric::kEuclidean};
  for (int v = 0; v <= 100; v += 5) {
    g.betas.push_back(v);
    g.gammas.push_back(v);
  }
  const double levels[] = {0.0, 1.0, 5.0, 10.0};
  if (full_grid) {
    for (double a : levels)
      for (double b : levels)
        for (double c : levels)
          for (double d : levels) g.taus.push_back({a, b, c, d});
  } else {
    for (double t1 : levels)
      for (double t2 : levels) g.taus.push_back({t1, t2, t1, t2});
  }
  return g;
}

TuneResult grid_search(const Dataset& dataset, Split val_split,
                       const GridSpec& grid, const TuneOptions& options) {
  const auto rows = dataset.split_indices(val_split);
  const auto flags = val_flags(dataset, rows);
  const auto ks =
      feasible_ks(grid.ks, available_neighbors(dataset, val_split, options));
  const auto k_max = static_cast<std::size_t>(*std::max_element(ks.begin(), ks.end()));
  TuneResult result;
  for (Metric metric : grid.metrics) {
    const HoodCache cache = build_cache(dataset, val_split, metric,
                                        text_metric(metric, options), k_max,
                                        options);
    auto trials = grid_over_cache(cache, flags, grid, ks, options.threads);
    result.trials.insert(result.trials.end(),
                         std::make_move_iterator(trials.begin()),
                         std::make_move_iterator(trials.end()));
  }
  pick_winner(result);
  return result;
}

SimplexResult simplex_optimize(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> x0) {
  const std::size_t n = x0.size();
  SimplexResult best{x0, -std::numeric_limits<double>::infinity(), 0};
  bool have_best = false;
  // Minimizes g = -f; non-finite f maps to +inf.
  auto eval = [&](const std::vector<double>& x) {
    const double f = objective(x);
    const double g = std::isfinite(f) ? -f : std::numeric_limits<double>::infinity();
    if (std::isfinite(f) && (!have_best || f > best.f)) {
      best.x = x;
      best.f = f;
      have_best = true;
    }
    return g;
  };

  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += kSimplexStep;
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  auto along = [&](const std::vector<double>& c, const std::vector<double>& x,
                   double t) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = c[j] + t * (x[j] - c[j]);
    return out;
  };

  int iter = 0;
  for (; iter < kSimplexMaxIter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return g[a] < g[b]; });
    const std::size_t lo = order.front();
    const std::size_t hi = order.back();
    const std::size_t second = order[n - 1];
    if (g[hi] - g[lo] < kSimplexFtol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
    }
    for (auto& v : centroid) v /= static_cast<double>(n);

    const auto xr = along(centroid, pts[hi], -1.0);
    const double gr = eval(xr);
    if (gr < g[lo]) {
      const auto xe = along(centroid, pts[hi], -2.0);
      const double ge = eval(xe);
      if (ge < gr) {
        pts[hi] = xe;
        g[hi] = ge;
      } else {
        pts[hi] = xr;
        g[hi] = gr;
      }
      continue;
    }
    if (gr < g[second]) {
      pts[hi] = xr;
      g[hi] = gr;
      continue;
    }
    bool shrink = false;
    if (gr < g[hi]) {
      const auto xc = along(centroid, xr, 0.5);
      const double gc = eval(xc);
      if (gc <= gr) {
        pts[hi] = xc;
        g[hi] = gc;
      } else {
        shrink = true;
      }
    } else {
      const auto xc = along(centroid, pts[hi], 0.5);
      const double gc = eval(xc);
      if (gc < g[hi]) {
        pts[hi] = xc;
        g[hi] = gc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == lo) continue;
        pts[i] = along(pts[lo], pts[i], 0.5);
        g[i] = eval(pts[i]);
      }
    }
  }
  best.iterations = iter;
  return best;
}

TuneResult tune_lemon(const Dataset& dataset, Split val_split,
                      const TuneOptions& options, bool full_grid) {
  const auto rows = dataset.split_indices(val_split);
  const auto flags = val_flags(dataset, rows);
  const GridSpec grid = GridSpec::standard(full_grid);
  const auto ks =
      feasible_ks(grid.ks, available_neighbors(dataset, val_split, options));
  LemonParams fix = lemon_fix_params();
  fix.dY_metric = text_metric(fix.dY_metric, options);
  const auto k_max = static_cast<std::size_t>(std::max(
      *std::max_element(ks.begin(), ks.end()),
      static_cast<int>(std::min<std::size_t>(
          fix.k, available_neighbors(dataset, val_split, options)))));

  TuneResult result;
  for (Metric metric : grid.metrics) {
    const HoodCache cache = build_cache(dataset, val_split, metric,
                                        text_metric(metric, options), k_max,
                                        options);
    auto trials = grid_over_cache(cache, flags, grid, ks, options.threads);
    result.trials.insert(result.trials.end(),
                         std::make_move_iterator(trials.begin()),
                         std::make_move_iterator(trials.end()));

    std::vector<Trial> simplex_trials(ks.size());
    parallel_for(ks.size(), options.threads, [&](std::size_t i) {
      LemonParams p;
      p.k = ks[i];
      p.dX_metric = cache.dX;
      p.dY_metric = cache.dY;
      auto to_params = [p](const std::vector<double>& x) {
        LemonParams q = p;
        q.beta = x[0];
        q.gamma = x[1];
        q.tau1_n = x[2];
        q.tau2_n = x[3];
        q.tau1_m = x[4];
        q.tau2_m = x[5];
        return q;
      };
      const SimplexResult sr = simplex_optimize(
          [&](const std::vector<double>& x) {
            return f1_of(cached_scores(cache, to_params(x)), flags);
          },
          std::vector<double>(6, 1.0));
      simplex_trials[i] = {to_params(sr.x), sr.f, TuneProvenance::kSimplex};
    });
    result.trials.insert(result.trials.end(), simplex_trials.begin(),
                         simplex_trials.end());

    if (metric == fix.dX_metric &&
        static_cast<std::size_t>(fix.k) <= k_max) {
      result.trials.push_back(
          {fix, f1_of(cached_scores(cache, fix), flags), TuneProvenance::kFixed});
    }
  }
  pick_winner(result);
  return result;
}

double validation_f1(const Dataset& dataset, Split val_split,
                     const LemonParams& params, const TuneOptions& options) {
  const auto rows = dataset.split_indices(val_split);
  const auto flags = val_flags(dataset, rows);
  MethodConfig config;
  config.params = params;
  const ScoreTable table = score_split(dataset, options.reference_split,
                                       val_split, "lemon", config,
                                       options.threads);
  std::vector<double> scores;
  scores.reserve(table.size());
  for (const ScoreRow& r : table) scores.push_back(r.score);
  return f1_of(scores, flags);
}

std::string tune_result_to_json(const TuneResult& result) {
  auto j = nlohmann::ordered_json::parse(params_to_json(result.best_params));
  j["val_f1"] = result.best_val_f1;
  j["provenance"] = std::string(provenance_name(result.provenance));
  j["num_trials"] = result.trials.size();
  return j.dump(2) + "\n";
}

}  // namespace lemon
