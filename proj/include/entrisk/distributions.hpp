#pragma once

#include <cstdint>

#include "entrisk/common.hpp"
#include "entrisk/types.hpp"

namespace entrisk {

// n i.i.d. draws: pick a component by weight, then Normal(mu, sigma).
ScenarioSet gmm_sample(const Gmm& q, std::size_t n, std::uint64_t seed);

// Reparameterized draws: sample_i = sum_k w_k (mu_k + sigma_k eps_k)
// with w = softmax((log pi + gumbel) / tau). Sensitivities are exact
// analytic partials with the noise held fixed.
DiffSampleBatch gmm_sample_diff(const Gmm& q, std::size_t n, double tau, std::uint64_t seed);

// Local MLE by EM with k-means++ style seeding; variances floored at 1e-6.
Gmm gmm_fit_em(const ScenarioSet& s, std::size_t y, std::size_t max_iter, double tol,
               std::uint64_t seed);

// Inverse cdf of Gamma(kappa, lambda); relative error <= 1e-8.
double gamma_quantile(const GammaSpec& g, double p);

// n i.i.d. Gamma draws by inverse-cdf of uniforms (bit-reproducible).
ScenarioSet gamma_sample(const GammaSpec& g, std::size_t n, std::uint64_t seed);

// n rows of M losses: u ~ Normal(0, r 11^T + (1-r) I) via the
// one-factor form sqrt(r) * common + sqrt(1-r) * own, pushed through
// the normal cdf and each marginal's Gamma quantile.
Matrix copula_sample(const CopulaSpec& c, std::size_t n, std::uint64_t seed);

}  // namespace entrisk
