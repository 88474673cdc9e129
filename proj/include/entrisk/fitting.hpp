#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrisk/types.hpp"

namespace entrisk {

struct RiskMatchConfig {
  std::size_t bins = 0;        // B; target bins, must divide N
  std::size_t model_bins = 0;  // B'; a multiple of B
  double step = 0.01;          // gamma
  std::size_t max_iter = 30000;
  double tol = 1.2340980408667956e-4;  // exp(-9)
  double tau = 0.5;
  std::size_t components = 2;
  std::string trace_path;  // optional per-iteration CSV
};

// Defaults for a sample of size n: B = divisor of n closest to
// round(sqrt(n)), B' = 4B, remaining fields as above.
RiskMatchConfig risk_match_default(std::size_t n);

struct RiskDistribution {
  std::vector<double> risks;
};

// Contiguous equal bins of size N/bins; per-bin empirical risk.
RiskDistribution bin_risks(const ScenarioSet& s, std::size_t bins, const RiskAversion& a);

// 2-Wasserstein distance between two 1-D empirical distributions:
// sort both and take the root-mean of squared order-statistic gaps.
// Unequal lengths are compared through their quantile functions on a
// shared midpoint grid of size 8 * max(|a|, |b|).
double w2_1d(const RiskDistribution& a, const RiskDistribution& b);

// Gradient of w2_1d with respect to each model risk (equal lengths).
std::vector<double> w2_1d_grad(const RiskDistribution& model, const RiskDistribution& target);

// Fits a mixture whose per-bin risk distribution matches the data's,
// by stochastic gradient descent through reparameterized samples.
Gmm fit_gmm_risk_match(const ScenarioSet& s, const RiskAversion& a, const RiskMatchConfig& cfg,
                       std::uint64_t seed);

// Two-component fit from block maxima: round(sqrt(N)) contiguous
// blocks, first component matches the 50th/90th maxima quantiles
// through the max-of-n-normals identity, second is a point mass
// placed so the mixture mean equals the sample mean. A nonpositive
// solved std falls back to 1e-3 and sets *degenerate.
Gmm fit_gmm_evt(const ScenarioSet& s, bool* degenerate = nullptr);

}  // namespace entrisk
