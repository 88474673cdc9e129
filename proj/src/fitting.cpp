#include "entrisk/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "entrisk/common.hpp"
#include "entrisk/distributions.hpp"
#include "entrisk/risk.hpp"
#include "entrisk/special.hpp"

namespace entrisk {

RiskMatchConfig risk_match_default(std::size_t n) {
  RiskMatchConfig cfg;
  std::size_t target = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  std::size_t best = 1;
  for (std::size_t d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    if (std::llabs(static_cast<long long>(d) - static_cast<long long>(target)) <
        std::llabs(static_cast<long long>(best) - static_cast<long long>(target)))
      best = d;
  }
  cfg.bins = best;
  cfg.model_bins = 4 * best;
  return cfg;
}

RiskDistribution bin_risks(const ScenarioSet& s, std::size_t bins, const RiskAversion& a) {
  s.validate();
  if (bins < 1 || s.size() % bins != 0)
    throw std::invalid_argument("bin_risks: bin count must divide the sample size");
  const std::size_t n = s.size() / bins;
  RiskDistribution out;
  out.risks.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    ScenarioSet blk;
    blk.losses.assign(s.losses.begin() + b * n, s.losses.begin() + (b + 1) * n);
    out.risks[b] = empirical_risk(blk, a);
  }
  return out;
}

double w2_1d(const RiskDistribution& a, const RiskDistribution& b) {
  if (a.risks.empty() || b.risks.empty()) throw std::invalid_argument("w2_1d: empty input");
  std::vector<double> x = a.risks, y = b.risks;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  if (x.size() == y.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s / static_cast<double>(x.size()));
  }
  const std::size_t grid = 8 * std::max(x.size(), y.size());
  auto qf = [](const std::vector<double>& v, double q) {
    std::size_t i = static_cast<std::size_t>(q * static_cast<double>(v.size()));
    if (i >= v.size()) i = v.size() - 1;
    return v[i];
  };
  double s = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    double q = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
    double d = qf(x, q) - qf(y, q);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(grid));
}

std::vector<double> w2_1d_grad(const RiskDistribution& model, const RiskDistribution& target) {
  if (model.risks.size() != target.risks.size())
    throw std::invalid_argument("w2_1d_grad: lengths must match");
  const std::size_t L = model.risks.size();
  double w = w2_1d(model, target);
  std::vector<double> grad(L, 0.0);
  if (w <= 0.0) return grad;
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return model.risks[i] < model.risks[j]; });
  std::vector<double> t = target.risks;
  std::sort(t.begin(), t.end());
  for (std::size_t r = 0; r < L; ++r)
    grad[order[r]] = (model.risks[order[r]] - t[r]) / (static_cast<double>(L) * w);
  return grad;
}

Gmm fit_gmm_risk_match(const ScenarioSet& s, const RiskAversion& a, const RiskMatchConfig& cfg,
                       std::uint64_t seed) {
  s.validate();
  a.validate();
  if (a.alpha <= 0.0) throw std::invalid_argument("fit_gmm_risk_match: requires alpha > 0");
  const std::size_t N = s.size();
  if (cfg.bins < 1 || N % cfg.bins != 0)
    throw std::invalid_argument("fit_gmm_risk_match: bins must divide N");
  if (cfg.model_bins < cfg.bins || cfg.model_bins % cfg.bins != 0)
    throw std::invalid_argument("fit_gmm_risk_match: model_bins must be a multiple of bins");
  if (cfg.max_iter < 1) throw std::invalid_argument("fit_gmm_risk_match: max_iter must be >= 1");

  const std::size_t B = cfg.bins;
  const std::size_t Bp = cfg.model_bins;
  const std::size_t n = N / B;  // scenarios per bin
  const double sigma_min = std::exp(-5.0);

  RiskDistribution target = bin_risks(s, B, a);
  std::vector<double> tq = target.risks;
  std::sort(tq.begin(), tq.end());
  // target quantile function on the B' midpoint grid
  RiskDistribution target_up;
  target_up.risks.resize(Bp);
  for (std::size_t i = 0; i < Bp; ++i) {
    double q = (static_cast<double>(i) + 0.5) / static_cast<double>(Bp);
    std::size_t idx = static_cast<std::size_t>(q * static_cast<double>(B));
    if (idx >= B) idx = B - 1;
    target_up.risks[i] = tq[idx];
  }

  Gmm q = gmm_fit_em(s, cfg.components, 200, 1e-8, child_seed(seed, 0));
  const std::size_t Y = q.components();
  std::vector<double> logits(Y);
  for (std::size_t k = 0; k < Y; ++k) logits[k] = std::log(q.weights[k]);

  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    trace << "iter,w2";
    for (std::size_t k = 0; k < Y; ++k) trace << ",weight" << k << ",mean" << k << ",std" << k;
    trace << "\n";
  }

  double gamma = cfg.step;
  double prev_w = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < cfg.max_iter; ++t) {
    DiffSampleBatch batch = gmm_sample_diff(q, Bp * n, cfg.tau, child_seed(seed, 1 + t));

    RiskDistribution model;
    model.risks.resize(Bp);
    std::vector<std::vector<double>> soft(Bp, std::vector<double>(n));
    for (std::size_t b = 0; b < Bp; ++b) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j)
        m = std::max(m, a.alpha * batch.samples[b * n + j]);
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        soft[b][j] = std::exp(a.alpha * batch.samples[b * n + j] - m);
        sum += soft[b][j];
      }
      model.risks[b] = (m + std::log(sum / static_cast<double>(n))) / a.alpha;
      for (std::size_t j = 0; j < n; ++j) soft[b][j] /= sum;
    }

    double w = w2_1d(model, target_up);
    if (trace.is_open()) {
      trace << t << ',' << w;
      for (std::size_t k = 0; k < Y; ++k)
        trace << ',' << q.weights[k] << ',' << q.means[k] << ',' << q.stds[k];
      trace << "\n";
    }
    if (w < cfg.tol) break;
    if (w > prev_w) gamma *= 0.5;
    prev_w = w;

    std::vector<double> grisk = w2_1d_grad(model, target_up);
    std::vector<double> gl(Y, 0.0), gm(Y, 0.0), gs(Y, 0.0);
    for (std::size_t b = 0; b < Bp; ++b) {
      for (std::size_t j = 0; j < n; ++j) {
        double coef = grisk[b] * soft[b][j];
        if (coef == 0.0) continue;
        const auto& sens = batch.sens[b * n + j];
        for (std::size_t k = 0; k < Y; ++k) {
          gl[k] += coef * sens[k][0];
          gm[k] += coef * sens[k][1];
          gs[k] += coef * sens[k][2];
        }
      }
    }

    for (std::size_t k = 0; k < Y; ++k) {
      logits[k] -= gamma * gl[k];
      q.means[k] -= gamma * gm[k];
      q.stds[k] -= gamma * gs[k];
    }
    double lm = *std::max_element(logits.begin(), logits.end());
    double lsum = 0.0;
    for (std::size_t k = 0; k < Y; ++k) lsum += std::exp(logits[k] - lm);
    for (std::size_t k = 0; k < Y; ++k) {
      q.weights[k] = std::exp(logits[k] - lm) / lsum;
      q.stds[k] = std::max(sigma_min, q.stds[k]);
      if (!std::isfinite(q.weights[k]) || !std::isfinite(q.means[k]) || !std::isfinite(q.stds[k]))
        throw std::runtime_error("fit_gmm_risk_match: parameters diverged at iteration " +
                                 std::to_string(t));
    }
  }
  q.validate();
  return q;
}

Gmm fit_gmm_evt(const ScenarioSet& s, bool* degenerate) {
  s.validate();
  const std::size_t N = s.size();
  if (N < 4) throw std::invalid_argument("fit_gmm_evt: needs at least 4 scenarios");
  if (degenerate) *degenerate = false;

  const std::size_t B =
      static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(N))));
  std::vector<double> maxima(B);
  // contiguous blocks with sizes differing by at most one
  std::size_t pos = 0;
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t len = N / B + (b < N % B ? 1 : 0);
    maxima[b] = *std::max_element(s.losses.begin() + pos, s.losses.begin() + pos + len);
    pos += len;
  }

  const double n = static_cast<double>(N) / static_cast<double>(B);
  // max of n iid N(mu, sigma) has cdf Phi((x-mu)/sigma)^n, so its
  // p-quantile is mu + sigma * Phi^-1(p^(1/n))
  const double z50 = normal_quantile(std::pow(0.5, 1.0 / n));
  const double z90 = normal_quantile(std::pow(0.9, 1.0 / n));
  const double q50 = quantile_nearest_rank(maxima, 0.5);
  const double q90 = quantile_nearest_rank(maxima, 0.9);

  double sigma_e = (q90 - q50) / (z90 - z50);
  double mu_e = q50 - sigma_e * z50;
  if (!(sigma_e > 0.0)) {
    sigma_e = 1e-3;
    if (degenerate) *degenerate = true;
  }

  const double mu_s = mean(s.losses);
  Gmm q;
  q.weights = {0.5, 0.5};
  q.means = {mu_e, 2.0 * (mu_s - 0.5 * mu_e)};
  q.stds = {sigma_e, 0.0};
  q.validate();
  return q;
}

}  // namespace entrisk
