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

#ifndef LEMON_THEORY_H_
#define LEMON_THEORY_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lemon::theory {

// Generative model of the text-neighbor score S_m.
//
// Distances from an image to non-paraphrase images are N(mu1, sigma1^2) and
// to paraphrase images N(mu2, sigma2^2). A clean sample has m of its k text
// neighbors relevant and correctly labeled, with m drawn from zeta_pmf
// (zeta_pmf[m] = P(m), m in 0..k) and zeta = m / (k (1 - p)). Only m / k
// enters the score, so p matters only through p == 1, where no neighbor is
// correctly labeled and m is forced to 0. A mislabeled sample has no
// relevant neighbors.
struct TheoryParams {
  double mu1 = 0.0;
  double sigma1 = 1.0;
  double mu2 = 0.0;
  double sigma2 = 1.0;
  int k = 1;
  double p = 0.0;
  std::vector<double> zeta_pmf;

  void validate() const;

  // Moments of zeta derived from the count pmf. Both are 0 when p == 1.
  double zeta_mean() const;
  double zeta_variance() const;
};

TheoryParams theory_params_from_json(std::string_view json);
std::string theory_params_to_json(const TheoryParams& params);

// Standard normal CDF via erfc.
double gaussian_cdf(double z);

// 1 - Phi(-mu / sigma) with mu = E[zeta](1-p)(mu1-mu2) and
// sigma^2 = (E[zeta](1-p) sigma2^2 + (2 - E[zeta](1-p)) sigma1^2) / k
//           + Var(zeta) (1-p)^2 (mu2-mu1)^2.
// Returns 0.5 when p == 1 or when mu == 0.
double closed_form_auroc(const TheoryParams& params);

// Exact AUROC of the generative model: the clean score is a mixture over m
// of Gaussians, so the probability is sum_m P(m) Phi(mu_m / sigma_m). Equals
// closed_form_auroc when zeta has zero variance.
double mixture_auroc(const TheoryParams& params);

struct SimulationResult {
  double auroc = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of P(S_m(mislabeled) > S_m(clean)), ties 1/2. Trial t
// draws from an RNG stream keyed by (seed, t), so the result is independent
// of `threads`.
SimulationResult simulate_auroc(const TheoryParams& params,
                                std::int64_t n_trials, std::uint64_t seed,
                                int threads = 1);

// p < 1, E[zeta] > 0 and mu1 > mu2.
bool lemma_regime_check(const TheoryParams& params);

struct LipschitzResult {
  double empirical_rate = 0.0;
  double delta_bound = 0.0;
  double std_error = 0.0;
};

// Label space R embedded on the unit circle by angle clamp(L y, -pi, pi),
// an L-Lipschitz map; the image anchor sits at angle pi/2 and the clean label
// at y = 0. Each trial draws eta ~ N(0, sigma^2) and tests
// |h(x) - h(y + eta)| >= |h(x) - h(y)| - L eps. delta = 1 - 2 Phi(-eps/sigma).
LipschitzResult verify_lipschitz_bound(double sigma, double epsilon,
                                       double lipschitz, std::int64_t n_trials,
                                       std::uint64_t seed, int threads = 1);

}  // namespace lemon::theory

#endif  // LEMON_THEORY_H_
