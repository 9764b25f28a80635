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

#include "lemon/theory.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "json.hpp"
#include "lemon/common.h"
#include "lemon/rng.h"

namespace lemon::theory {
namespace {

using Json = nlohmann::ordered_json;

double count_mean(const TheoryParams& p) {
  double mean = 0.0;
  for (std::size_t m = 0; m < p.zeta_pmf.size(); ++m) {
    mean += static_cast<double>(m) * p.zeta_pmf[m];
  }
  return mean;
}

double count_variance(const TheoryParams& p) {
  const double mean = count_mean(p);
  double var = 0.0;
  for (std::size_t m = 0; m < p.zeta_pmf.size(); ++m) {
    const double d = static_cast<double>(m) - mean;
    var += d * d * p.zeta_pmf[m];
  }
  return var;
}

// Inverse-CDF draw of the relevant-neighbor count.
int draw_count(const std::vector<double>& pmf, double u) {
  double acc = 0.0;
  for (std::size_t m = 0; m < pmf.size(); ++m) {
    acc += pmf[m];
    if (u < acc) return static_cast<int>(m);
  }
  // u landed in the rounding slack above the last partial sum.
  for (std::size_t m = pmf.size(); m-- > 0;) {
    if (pmf[m] > 0.0) return static_cast<int>(m);
  }
  return 0;
}

// Splits [0, n) into fixed chunks so the per-chunk tallies, and hence the
// totals, do not depend on the worker count.
template <typename Fn>
std::int64_t tally_trials(std::int64_t n_trials, int threads, Fn&& trial) {
  constexpr std::int64_t kChunk = 4096;
  const auto chunks = static_cast<std::size_t>((n_trials + kChunk - 1) / kChunk);
  std::vector<std::int64_t> partial(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t end = std::min(n_trials, begin + kChunk);
    std::int64_t sum = 0;
    for (std::int64_t t = begin; t < end; ++t) sum += trial(t);
    partial[c] = sum;
  });
  return std::accumulate(partial.begin(), partial.end(), std::int64_t{0});
}

}  // namespace

void TheoryParams::validate() const {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw ValidationError("sigma1 and sigma2 must be positive");
  }
  if (!std::isfinite(mu1) || !std::isfinite(mu2) || !std::isfinite(sigma1) ||
      !std::isfinite(sigma2)) {
    throw ValidationError("distance moments must be finite");
  }
  if (k < 1) throw ValidationError("k must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0, 1]");
  if (zeta_pmf.empty() || zeta_pmf.size() > static_cast<std::size_t>(k) + 1) {
    throw ValidationError("zeta_pmf must have between 1 and k+1 entries");
  }
  double total = 0.0;
  for (double w : zeta_pmf) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("zeta_pmf entries must be finite and >= 0");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("zeta_pmf must sum to 1 (got " +
                          format_double(total) + ")");
  }
}

double TheoryParams::zeta_mean() const {
  if (p >= 1.0) return 0.0;
  return count_mean(*this) / (static_cast<double>(k) * (1.0 - p));
}

double TheoryParams::zeta_variance() const {
  if (p >= 1.0) return 0.0;
  const double scale = static_cast<double>(k) * (1.0 - p);
  return count_variance(*this) / (scale * scale);
}

TheoryParams theory_params_from_json(std::string_view text) {
  TheoryParams p;
  try {
    const Json j = Json::parse(text);
    p.mu1 = j.at("mu1").get<double>();
    p.sigma1 = j.at("sigma1").get<double>();
    p.mu2 = j.at("mu2").get<double>();
    p.sigma2 = j.at("sigma2").get<double>();
    p.k = j.at("k").get<int>();
    p.p = j.at("p").get<double>();
    p.zeta_pmf = j.at("zeta_pmf").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("theory params: ") + e.what());
  }
  p.validate();
  return p;
}

std::string theory_params_to_json(const TheoryParams& p) {
  Json j;
  j["mu1"] = p.mu1;
  j["sigma1"] = p.sigma1;
  j["mu2"] = p.mu2;
  j["sigma2"] = p.sigma2;
  j["k"] = p.k;
  j["p"] = p.p;
  j["zeta_pmf"] = p.zeta_pmf;
  return j.dump(2) + "\n";
}

double gaussian_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double closed_form_auroc(const TheoryParams& params) {
  params.validate();
  if (params.p >= 1.0) return 0.5;
  const double k = static_cast<double>(params.k);
  // E[zeta](1-p) and Var(zeta)(1-p)^2 in count form.
  const double relevant = count_mean(params) / k;
  const double relevant_var = count_variance(params) / (k * k);
  const double gap = params.mu1 - params.mu2;
  const double mu = relevant * gap;
  if (mu == 0.0) return 0.5;
  const double var = (relevant * params.sigma2 * params.sigma2 +
                      (2.0 - relevant) * params.sigma1 * params.sigma1) /
                         k +
                     relevant_var * gap * gap;
  const double sigma = std::sqrt(var);
  if (!std::isfinite(mu / sigma)) {
    throw ValidationError("closed form: non-finite intermediate");
  }
  return 1.0 - gaussian_cdf(-mu / sigma);
}

double mixture_auroc(const TheoryParams& params) {
  params.validate();
  if (params.p >= 1.0) return 0.5;
  const double k = static_cast<double>(params.k);
  const double s1 = params.sigma1 * params.sigma1;
  const double s2 = params.sigma2 * params.sigma2;
  double total = 0.0;
  for (std::size_t m = 0; m < params.zeta_pmf.size(); ++m) {
    if (params.zeta_pmf[m] == 0.0) continue;
    const double md = static_cast<double>(m);
    const double mu = md / k * (params.mu1 - params.mu2);
    const double sd = std::sqrt(md * s2 + (2.0 * k - md) * s1) / k;
    total += params.zeta_pmf[m] * (mu == 0.0 ? 0.5 : gaussian_cdf(mu / sd));
  }
  return total;
}

SimulationResult simulate_auroc(const TheoryParams& params,
                                std::int64_t n_trials, std::uint64_t seed,
                                int threads) {
  params.validate();
  if (n_trials < 1000) throw ValidationError("n_trials must be >= 1000");
  const int k = params.k;
  const bool no_correct_neighbors = params.p >= 1.0;
  // Each trial contributes 2 for a win and 1 for a tie.
  const std::int64_t half_wins = tally_trials(n_trials, threads, [&](std::int64_t t) {
    Rng rng = Rng::keyed(seed, static_cast<std::uint64_t>(t));
    const int m = no_correct_neighbors ? 0 : draw_count(params.zeta_pmf, rng.uniform());
    double clean = 0.0;
    for (int i = 0; i < m; ++i) clean += rng.normal(params.mu2, params.sigma2);
    for (int i = m; i < k; ++i) clean += rng.normal(params.mu1, params.sigma1);
    double mislabeled = 0.0;
    for (int i = 0; i < k; ++i) mislabeled += rng.normal(params.mu1, params.sigma1);
    clean /= k;
    mislabeled /= k;
    if (mislabeled > clean) return std::int64_t{2};
    if (mislabeled == clean) return std::int64_t{1};
    return std::int64_t{0};
  });
  SimulationResult out;
  const double n = static_cast<double>(n_trials);
  out.auroc = static_cast<double>(half_wins) / (2.0 * n);
  out.std_error = std::sqrt(out.auroc * (1.0 - out.auroc) / n);
  return out;
}

bool lemma_regime_check(const TheoryParams& params) {
  params.validate();
  return params.p < 1.0 && count_mean(params) > 0.0 && params.mu1 > params.mu2;
}

LipschitzResult verify_lipschitz_bound(double sigma, double epsilon,
                                       double lipschitz, std::int64_t n_trials,
                                       std::uint64_t seed, int threads) {
  if (!(sigma > 0.0) || !(epsilon > 0.0)) {
    throw ValidationError("sigma and epsilon must be positive");
  }
  if (!(lipschitz >= 0.0)) throw ValidationError("L must be >= 0");
  if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
  static constexpr double kPi = std::numbers::pi;
  auto embed = [lipschitz](double y) {
    const double angle = std::clamp(lipschitz * y, -kPi, kPi);
    return std::pair{std::cos(angle), std::sin(angle)};
  };
  const std::pair<double, double> anchor{0.0, 1.0};
  auto dist = [&](std::pair<double, double> v) {
    return std::hypot(anchor.first - v.first, anchor.second - v.second);
  };
  const double clean = dist(embed(0.0));
  const double slack = lipschitz * epsilon;
  const std::int64_t held = tally_trials(n_trials, threads, [&](std::int64_t t) {
    Rng rng = Rng::keyed(seed, static_cast<std::uint64_t>(t));
    const double eta = sigma * rng.normal();
    return dist(embed(eta)) >= clean - slack ? std::int64_t{1} : std::int64_t{0};
  });
  LipschitzResult out;
  const double n = static_cast<double>(n_trials);
  out.empirical_rate = static_cast<double>(held) / n;
  out.delta_bound = 1.0 - 2.0 * gaussian_cdf(-epsilon / sigma);
  out.std_error = std::sqrt(out.delta_bound * (1.0 - out.delta_bound) / n);
  return out;
}

}  // namespace lemon::theory
