#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace entrisk {

// Arrow-Pratt risk aversion; alpha = 0 selects the expectation branch.
struct RiskAversion {
  double alpha = 1.0;

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("RiskAversion: alpha must be finite and nonnegative");
  }
};

struct ScenarioSet {
  std::vector<double> losses;

  void validate() const {
    if (losses.empty()) throw std::invalid_argument("ScenarioSet: needs at least one loss");
    for (double x : losses)
      if (!std::isfinite(x)) throw std::invalid_argument("ScenarioSet: losses must be finite");
  }
  std::size_t size() const { return losses.size(); }
};

struct GammaSpec {
  double kappa = 1.0;  // shape
  double lambda = 1.0; // scale

  void validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("GammaSpec: shape must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("GammaSpec: scale must be positive");
  }
};

// Univariate Gaussian mixture (pi, mu, sigma).
struct Gmm {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;

  std::size_t components() const { return weights.size(); }

  void validate() const {
    if (weights.empty() || weights.size() != means.size() || weights.size() != stds.size())
      throw std::invalid_argument("Gmm: weights/means/stds must be nonempty and equal length");
    double s = 0.0;
    for (double w : weights) {
      if (!(w > 0.0) || w > 1.0) throw std::invalid_argument("Gmm: weights must lie in (0,1]");
      s += w;
    }
    if (std::fabs(s - 1.0) > 1e-9) throw std::invalid_argument("Gmm: weights must sum to 1");
    for (double sd : stds)
      if (!(sd >= 0.0)) throw std::invalid_argument("Gmm: stds must be nonnegative");
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) m += weights[k] * means[k];
    return m;
  }
};

// Gaussian copula with covariance r*11^T + (1-r)*I and Gamma marginals.
struct CopulaSpec {
  double r = 0.0;
  std::vector<GammaSpec> marginals;

  void validate() const {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("CopulaSpec: r must lie in [0,1]");
    if (marginals.empty()) throw std::invalid_argument("CopulaSpec: needs at least one marginal");
    for (const auto& g : marginals) g.validate();
  }
};

// Reparameterized mixture samples with analytic partials of each
// sample w.r.t. every component's (weight-logit, mean, std).
struct DiffSampleBatch {
  std::vector<double> samples;
  // sens[i][k] = {d sample_i / d logit_k, d/d mu_k, d/d sigma_k}
  std::vector<std::vector<std::array<double, 3>>> sens;
};

}  // namespace entrisk
