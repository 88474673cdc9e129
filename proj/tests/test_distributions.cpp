#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "entrisk/distributions.hpp"
#include "entrisk/rng.hpp"
#include "entrisk/special.hpp"

using namespace entrisk;

namespace {

Gmm example2() {
  Gmm q;
  q.weights = {0.7, 0.3};
  q.means = {0.5, 1.0};
  q.stds = {2.0, 1.0};
  return q;
}

std::vector<std::size_t> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size()), r(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = k;
  return r;
}

}  // namespace

TEST_CASE("mixture sampling basics") {
  Gmm point;
  point.weights = {1.0};
  point.means = {5.0};
  point.stds = {0.0};
  ScenarioSet s = gmm_sample(point, 3, 1);
  CHECK(s.losses == std::vector<double>{5.0, 5.0, 5.0});

  ScenarioSet a = gmm_sample(example2(), 100, 42);
  ScenarioSet b = gmm_sample(example2(), 100, 42);
  CHECK(a.losses == b.losses);
  ScenarioSet c = gmm_sample(example2(), 100, 43);
  CHECK(a.losses != c.losses);
}

TEST_CASE("mixture sample mean matches the model mean") {
  const std::size_t n = 1000000;
  ScenarioSet s = gmm_sample(example2(), n, 7);
  double m = 0.0, v = 0.0;
  for (double x : s.losses) m += x;
  m /= n;
  for (double x : s.losses) v += (x - m) * (x - m);
  double se = std::sqrt(v / n) / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(m - 0.65) <= 3.0 * se);
}

TEST_CASE("reparameterized sampling: single component and zero stds") {
  Gmm one;
  one.weights = {1.0};
  one.means = {2.0};
  one.stds = {0.5};
  DiffSampleBatch b = gmm_sample_diff(one, 5, 0.5, 9);
  for (std::size_t i = 0; i < 5; ++i) {
    double eps = (b.samples[i] - 2.0) / 0.5;
    CHECK(b.sens[i][0][1] == doctest::Approx(1.0));
    CHECK(b.sens[i][0][2] == doctest::Approx(eps).epsilon(1e-12));
    CHECK(b.sens[i][0][0] == doctest::Approx(0.0));
  }

  Gmm flat = example2();
  flat.stds = {0.0, 0.0};
  DiffSampleBatch c = gmm_sample_diff(flat, 50, 0.7, 10);
  for (double s : c.samples) {
    CHECK(s >= 0.5 - 1e-12);
    CHECK(s <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(gmm_sample_diff(flat, 5, 0.0, 1), std::invalid_argument);
}

TEST_CASE("reparameterized sensitivities match central differences") {
  Gmm q = example2();
  const double tau = 0.5;
  const std::uint64_t seed = 31;
  const std::size_t n = 6;
  const double h = 1e-6;
  DiffSampleBatch base = gmm_sample_diff(q, n, tau, seed);
  for (std::size_t k = 0; k < q.components(); ++k) {
    for (int dim = 0; dim < 3; ++dim) {
      Gmm up = q, dn = q;
      if (dim == 0) {
        // perturb the weight logit: scale one weight by exp(+-h), renormalize
        double su = 0.0, sd = 0.0;
        up.weights[k] *= std::exp(h);
        dn.weights[k] *= std::exp(-h);
        for (double w : up.weights) su += w;
        for (double w : dn.weights) sd += w;
        for (double& w : up.weights) w /= su;
        for (double& w : dn.weights) w /= sd;
      } else if (dim == 1) {
        up.means[k] += h;
        dn.means[k] -= h;
      } else {
        up.stds[k] += h;
        dn.stds[k] -= h;
      }
      DiffSampleBatch bu = gmm_sample_diff(up, n, tau, seed);
      DiffSampleBatch bd = gmm_sample_diff(dn, n, tau, seed);
      for (std::size_t i = 0; i < n; ++i) {
        double fd = (bu.samples[i] - bd.samples[i]) / (2.0 * h);
        double an = base.sens[i][k][dim];
        if (dim == 0) {
          // renormalized weights shift every logit: d logit_j = (delta_jk - w_k) h
          an = 0.0;
          for (std::size_t j = 0; j < q.components(); ++j)
            an += base.sens[i][j][0] * ((j == k ? 1.0 : 0.0) - q.weights[k]);
        }
        CHECK(fd == doctest::Approx(an).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("EM fit basics") {
  ScenarioSet flat;
  flat.losses.assign(50, 3.25);
  Gmm q = gmm_fit_em(flat, 1, 100, 1e-9, 5);
  CHECK(q.means[0] == doctest::Approx(3.25).epsilon(1e-9));
  CHECK(q.stds[0] == doctest::Approx(1e-3));

  ScenarioSet s = gmm_sample(example2(), 5000, 77);
  Gmm one = gmm_fit_em(s, 1, 200, 1e-10, 5);
  double m = 0.0;
  for (double x : s.losses) m += x;
  m /= s.size();
  double v = 0.0;
  for (double x : s.losses) v += (x - m) * (x - m);
  v /= s.size();
  CHECK(one.means[0] == doctest::Approx(m).epsilon(1e-6));
  CHECK(one.stds[0] == doctest::Approx(std::sqrt(v)).epsilon(1e-6));

  CHECK_THROWS_AS(gmm_fit_em(flat, 51, 10, 1e-6, 1), std::invalid_argument);
}

TEST_CASE("EM recovers the two-component structure for most seeds") {
  std::size_t good = 0;
  const int seeds = 5;
  for (int sd = 0; sd < seeds; ++sd) {
    ScenarioSet s = gmm_sample(example2(), 100000, 1000 + sd);
    Gmm q = gmm_fit_em(s, 2, 200, 1e-8, sd);
    std::vector<double> mu = q.means;
    std::sort(mu.begin(), mu.end());
    if (std::fabs(mu[0] - 0.5) < 0.3 || std::fabs(mu[1] - 1.0) < 0.3 ||
        std::fabs(mu[0] - 1.0) < 0.3 || std::fabs(mu[1] - 0.5) < 0.3)
      ++good;
  }
  CHECK(good * 2 > seeds);
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  // oracle: bisection on the erf-based cdf
  auto bisect = [](double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (lo + hi);
      (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  for (double p : {0.975, 0.1, 0.0001, 0.92, 0.5000001})
    CHECK(std::fabs(normal_quantile(p) - bisect(p)) <= 1e-9);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_quantile(0.1) == doctest::Approx(-1.281552).epsilon(1e-6));
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("gamma quantile") {
  for (double p : {0.05, 0.3, 0.5, 0.9, 0.99})
    CHECK(gamma_quantile({1.0, 1.0}, p) == doctest::Approx(-std::log(1.0 - p)).epsilon(1e-10));
  CHECK(gamma_quantile({1.0, 2.0}, 0.5) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));

  // bisection oracle on the regularized incomplete gamma cdf
  GammaSpec g{10.0, 0.45};
  double p = 0.99;
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (gamma_p(g.kappa, mid / g.lambda) < p ? lo : hi) = mid;
  }
  CHECK(gamma_quantile(g, p) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-8));
  CHECK_THROWS_AS(gamma_quantile(g, 1.5), std::invalid_argument);
}

TEST_CASE("copula sampling") {
  CopulaSpec c;
  c.r = 1.0;
  c.marginals = {GammaSpec{10.0, 0.45}, GammaSpec{10.0, 0.45}, GammaSpec{10.0, 0.45}};
  Matrix m = copula_sample(c, 200, 3);
  std::vector<double> col0(200), col1(200), col2(200);
  for (std::size_t i = 0; i < 200; ++i) {
    col0[i] = m[i][0];
    col1[i] = m[i][1];
    col2[i] = m[i][2];
  }
  CHECK(ranks(col0) == ranks(col1));
  CHECK(ranks(col0) == ranks(col2));

  c.r = 0.0;
  c.marginals = {GammaSpec{10.0, 0.45}, GammaSpec{4.0, 1.0}};
  const std::size_t n = 40000;
  Matrix ind = copula_sample(c, n, 4);
  // correlation of the normal scores should vanish
  double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double u = normal_quantile(gamma_p(c.marginals[0].kappa, ind[i][0] / c.marginals[0].lambda));
    double v = normal_quantile(gamma_p(c.marginals[1].kappa, ind[i][1] / c.marginals[1].lambda));
    sx += u; sy += v; sxy += u * v; sxx += u * u; syy += v * v;
  }
  double corr = (sxy / n - sx / n * sy / n) /
                std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  CHECK(std::fabs(corr) <= 3.0 / std::sqrt(static_cast<double>(n)));

  Matrix again = copula_sample(c, 50, 4);
  for (std::size_t i = 0; i < 50; ++i) CHECK(again[i] == ind[i]);
}

TEST_CASE("copula marginals have the right mean") {
  CopulaSpec c;
  c.r = 0.5;
  c.marginals = {GammaSpec{10.0, 0.45}, GammaSpec{8.0, 0.41}};
  const std::size_t n = 200000;
  Matrix m = copula_sample(c, n, 6);
  for (std::size_t h = 0; h < 2; ++h) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += m[i][h];
    mean /= n;
    for (std::size_t i = 0; i < n; ++i) var += (m[i][h] - mean) * (m[i][h] - mean);
    double se = std::sqrt(var / n) / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(mean - c.marginals[h].kappa * c.marginals[h].lambda) <= 3.0 * se);
  }
}
