#include "entrisk/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "entrisk/rng.hpp"
#include "entrisk/special.hpp"

namespace entrisk {

ScenarioSet gmm_sample(const Gmm& q, std::size_t n, std::uint64_t seed) {
  q.validate();
  if (n < 1) throw std::invalid_argument("gmm_sample: n must be >= 1");
  Rng rng(seed);
  std::vector<double> cum(q.components());
  double acc = 0.0;
  for (std::size_t k = 0; k < cum.size(); ++k) {
    acc += q.weights[k];
    cum[k] = acc;
  }
  cum.back() = 1.0;
  ScenarioSet out;
  out.losses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform();
    std::size_t k = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    double z = rng.normal();
    out.losses[i] = q.means[k] + q.stds[k] * z;
  }
  return out;
}

DiffSampleBatch gmm_sample_diff(const Gmm& q, std::size_t n, double tau, std::uint64_t seed) {
  q.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("gmm_sample_diff: tau must be positive");
  const std::size_t Y = q.components();
  Rng rng(seed);
  DiffSampleBatch out;
  out.samples.resize(n);
  out.sens.assign(n, std::vector<std::array<double, 3>>(Y));
  std::vector<double> logits(Y), g(Y), eps(Y), w(Y), z(Y);
  for (std::size_t k = 0; k < Y; ++k) logits[k] = std::log(q.weights[k]);
  for (std::size_t i = 0; i < n; ++i) {
    // draw count per sample is parameter-independent: Y gumbels, Y normals
    for (std::size_t k = 0; k < Y; ++k) g[k] = rng.gumbel();
    for (std::size_t k = 0; k < Y; ++k) eps[k] = rng.normal();
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < Y; ++k) {
      w[k] = (logits[k] + g[k]) / tau;
      m = std::max(m, w[k]);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < Y; ++k) {
      w[k] = std::exp(w[k] - m);
      s += w[k];
    }
    double sample = 0.0;
    for (std::size_t k = 0; k < Y; ++k) {
      w[k] /= s;
      z[k] = q.means[k] + q.stds[k] * eps[k];
      sample += w[k] * z[k];
    }
    out.samples[i] = sample;
    for (std::size_t k = 0; k < Y; ++k) {
      out.sens[i][k][0] = w[k] * (z[k] - sample) / tau;
      out.sens[i][k][1] = w[k];
      out.sens[i][k][2] = w[k] * eps[k];
    }
  }
  return out;
}

namespace {

constexpr double kVarFloor = 1e-6;

// k-means++ seeding on the scalar data, then a few Lloyd passes.
std::vector<double> kmeans_centers(const std::vector<double>& x, std::size_t y, Rng& rng) {
  const std::size_t n = x.size();
  std::vector<double> centers;
  centers.reserve(y);
  centers.push_back(x[rng.below(n)]);
  std::vector<double> d2(n);
  while (centers.size() < y) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (x[i] - c) * (x[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(x[rng.below(n)]);
      continue;
    }
    double u = rng.uniform() * total;
    std::size_t pick = n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc >= u) {
        pick = i;
        break;
      }
    }
    centers.push_back(x[pick]);
  }
  for (int pass = 0; pass < 5; ++pass) {
    std::vector<double> sum(y, 0.0);
    std::vector<std::size_t> cnt(y, 0);
    for (double xi : x) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < y; ++k) {
        double d = (xi - centers[k]) * (xi - centers[k]);
        if (d < bd) {
          bd = d;
          best = k;
        }
      }
      sum[best] += xi;
      ++cnt[best];
    }
    for (std::size_t k = 0; k < y; ++k)
      if (cnt[k]) centers[k] = sum[k] / static_cast<double>(cnt[k]);
  }
  return centers;
}

}  // namespace

Gmm gmm_fit_em(const ScenarioSet& s, std::size_t y, std::size_t max_iter, double tol,
               std::uint64_t seed) {
  s.validate();
  const std::size_t n = s.size();
  if (y < 1 || y > n) throw std::invalid_argument("gmm_fit_em: need 1 <= y <= N");
  const std::vector<double>& x = s.losses;
  Rng rng(seed);

  Gmm q;
  q.weights.assign(y, 1.0 / static_cast<double>(y));
  q.means = kmeans_centers(x, y, rng);
  double mu0 = mean(x);
  double v0 = 0.0;
  for (double xi : x) v0 += (xi - mu0) * (xi - mu0);
  v0 = std::max(v0 / static_cast<double>(n), kVarFloor);
  q.stds.assign(y, std::sqrt(v0));

  std::vector<std::vector<double>> resp(n, std::vector<double>(y));
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iter; ++it) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < y; ++k) {
        double sd = q.stds[k];
        double d = (x[i] - q.means[k]) / sd;
        resp[i][k] = std::log(q.weights[k]) - std::log(sd) - 0.5 * d * d -
                     0.5 * std::log(2.0 * 3.14159265358979323846);
        m = std::max(m, resp[i][k]);
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < y; ++k) sum += std::exp(resp[i][k] - m);
      ll += m + std::log(sum);
      for (std::size_t k = 0; k < y; ++k) resp[i][k] = std::exp(resp[i][k] - m) / sum;
    }
    for (std::size_t k = 0; k < y; ++k) {
      double nk = 0.0, mk = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i][k];
        mk += resp[i][k] * x[i];
      }
      nk = std::max(nk, 1e-12 * static_cast<double>(n));
      mk /= nk;
      double vk = 0.0;
      for (std::size_t i = 0; i < n; ++i) vk += resp[i][k] * (x[i] - mk) * (x[i] - mk);
      vk = std::max(vk / nk, kVarFloor);
      q.weights[k] = std::max(nk / static_cast<double>(n), 1e-12);
      q.means[k] = mk;
      q.stds[k] = std::sqrt(vk);
    }
    double ws = 0.0;
    for (double w : q.weights) ws += w;
    for (double& w : q.weights) w /= ws;
    if (ll - prev_ll < tol && it > 0) break;
    prev_ll = ll;
  }
  q.validate();
  return q;
}

double gamma_quantile(const GammaSpec& g, double p) {
  g.validate();
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gamma_quantile: p must lie in (0,1)");
  return g.lambda * gamma_p_inv(g.kappa, p);
}

ScenarioSet gamma_sample(const GammaSpec& g, std::size_t n, std::uint64_t seed) {
  g.validate();
  if (n < 1) throw std::invalid_argument("gamma_sample: n must be >= 1");
  Rng rng(seed);
  ScenarioSet out;
  out.losses.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.losses[i] = gamma_quantile(g, rng.uniform());
  return out;
}

Matrix copula_sample(const CopulaSpec& c, std::size_t n, std::uint64_t seed) {
  c.validate();
  if (n < 1) throw std::invalid_argument("copula_sample: n must be >= 1");
  const std::size_t M = c.marginals.size();
  const double sr = std::sqrt(c.r);
  const double si = std::sqrt(1.0 - c.r);
  Rng rng(seed);
  Matrix out(n, std::vector<double>(M));
  for (std::size_t i = 0; i < n; ++i) {
    double common = rng.normal();
    for (std::size_t h = 0; h < M; ++h) {
      double u = sr * common + si * rng.normal();
      double p = normal_cdf(u);
      p = std::min(std::max(p, 1e-15), 1.0 - 1e-15);
      out[i][h] = gamma_quantile(c.marginals[h], p);
    }
  }
  return out;
}

}  // namespace entrisk
