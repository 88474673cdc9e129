#include "entrisk/dro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "entrisk/risk.hpp"

namespace entrisk {

namespace {

double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// One subgradient of ||.||_* at v (dual of the ball's primal norm).
std::vector<double> dual_norm_subgrad(const std::vector<double>& v, Norm norm) {
  std::vector<double> g(v.size(), 0.0);
  switch (norm) {
    case Norm::L2: {
      double n = dual_norm(v, Norm::L2);
      if (n > 0.0)
        for (std::size_t j = 0; j < v.size(); ++j) g[j] = v[j] / n;
      break;
    }
    case Norm::L1: {  // dual is max-abs
      std::size_t best = 0;
      for (std::size_t j = 1; j < v.size(); ++j)
        if (std::fabs(v[j]) > std::fabs(v[best])) best = j;
      if (v[best] != 0.0) g[best] = (v[best] > 0.0) ? 1.0 : -1.0;
      break;
    }
    case Norm::LINF: {  // dual is sum-abs
      for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j] != 0.0) g[j] = (v[j] > 0.0) ? 1.0 : -1.0;
      break;
    }
  }
  return g;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dims(const std::vector<double>& z, const Matrix& scenarios) {
  if (scenarios.empty()) throw std::invalid_argument("dro: needs at least one scenario");
  for (const auto& row : scenarios)
    if (row.size() != z.size()) throw std::invalid_argument("dro: dimension mismatch");
}

}  // namespace

double dual_norm(const std::vector<double>& v, Norm norm) {
  double s = 0.0;
  switch (norm) {
    case Norm::L2:
      for (double x : v) s += x * x;
      return std::sqrt(s);
    case Norm::L1:  // dual of L1 is max-abs
      for (double x : v) s = std::max(s, std::fabs(x));
      return s;
    case Norm::LINF:  // dual of Linf is sum-abs
      for (double x : v) s += std::fabs(x);
      return s;
  }
  return s;
}

double dro_value_linear(const std::vector<double>& z, const Matrix& scenarios,
                        const RiskAversion& a, const AmbiguityBall& ball) {
  a.validate();
  ball.validate();
  check_dims(z, scenarios);
  ScenarioSet s;
  s.losses.reserve(scenarios.size());
  for (const auto& row : scenarios) s.losses.push_back(dot(z, row));
  return empirical_risk(s, a) + ball.radius * dual_norm(z, ball.norm);
}

double dro_value_piecewise(const std::vector<double>& z, const PiecewiseLinearLoss& loss,
                           const Matrix& scenarios, const RiskAversion& a,
                           const AmbiguityBall& ball) {
  a.validate();
  ball.validate();
  check_dims(z, scenarios);
  if (loss.pieces.empty()) throw std::invalid_argument("dro: loss needs at least one piece");
  const double zn = dual_norm(z, ball.norm);
  ScenarioSet s;
  s.losses.reserve(scenarios.size());
  for (const auto& row : scenarios) {
    double u = dot(z, row);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& [ak, bk] : loss.pieces)
      worst = std::max(worst, ak * u + bk + ball.radius * std::fabs(ak) * zn);
    s.losses.push_back(worst);
  }
  return empirical_risk(s, a);
}

double worst_case_brute(const std::vector<double>& z,
                        const std::function<double(const std::vector<double>&)>& loss,
                        const Matrix& scenarios, const RiskAversion& a, const AmbiguityBall& ball,
                        std::size_t grid) {
  a.validate();
  ball.validate();
  check_dims(z, scenarios);
  const std::size_t d = z.size();
  if (d > 3) throw std::invalid_argument("worst_case_brute: supports d <= 3 only");
  const double eps = ball.radius;

  std::vector<double> axis;
  if (grid <= 1 || eps == 0.0) {
    axis = {0.0};
  } else {
    for (std::size_t i = 0; i < grid; ++i)
      axis.push_back(-eps + 2.0 * eps * static_cast<double>(i) / static_cast<double>(grid - 1));
  }
  // all lattice offsets inside the primal ball, plus the center
  std::vector<std::vector<double>> offsets;
  std::vector<std::size_t> idx(d, 0);
  for (;;) {
    std::vector<double> off(d);
    for (std::size_t j = 0; j < d; ++j) off[j] = axis[idx[j]];
    double pn = 0.0;
    switch (ball.norm) {
      case Norm::L1:
        for (double x : off) pn += std::fabs(x);
        break;
      case Norm::L2: {
        double s2 = 0.0;
        for (double x : off) s2 += x * x;
        pn = std::sqrt(s2);
        break;
      }
      case Norm::LINF:
        for (double x : off) pn = std::max(pn, std::fabs(x));
        break;
    }
    if (pn <= eps * (1.0 + 1e-12)) offsets.push_back(off);
    std::size_t j = 0;
    while (j < d && ++idx[j] == axis.size()) idx[j++] = 0;
    if (j == d) break;
  }
  offsets.push_back(std::vector<double>(d, 0.0));

  ScenarioSet worst;
  worst.losses.reserve(scenarios.size());
  std::vector<double> pt(d);
  for (const auto& row : scenarios) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& off : offsets) {
      for (std::size_t j = 0; j < d; ++j) pt[j] = row[j] + off[j];
      best = std::max(best, loss(pt));
    }
    worst.losses.push_back(best);
  }
  return empirical_risk(worst, a);
}

namespace {

// Shared scaffold: subgradient descent with diminishing steps and
// best-iterate tracking, then coordinate-wise golden-section sweeps.
SolveResult box_convex_solve(const std::function<double(const std::vector<double>&)>& f,
                             const std::function<std::vector<double>(const std::vector<double>&)>& grad,
                             const std::vector<std::pair<double, double>>& box,
                             std::size_t max_iter) {
  const std::size_t d = box.size();
  auto clamp = [&](std::vector<double>& z) {
    for (std::size_t j = 0; j < d; ++j) z[j] = std::min(std::max(z[j], box[j].first), box[j].second);
  };
  std::vector<double> z(d);
  for (std::size_t j = 0; j < d; ++j) z[j] = 0.5 * (box[j].first + box[j].second);
  clamp(z);
  std::vector<double> best_z = z;
  double best_f = f(z);
  if (!std::isfinite(best_f)) throw std::runtime_error("dro solver: non-finite objective");
  double gamma0 = 1.0;
  for (std::size_t t = 1; t <= max_iter; ++t) {
    std::vector<double> g = grad(z);
    double step = gamma0 / std::sqrt(static_cast<double>(t));
    std::vector<double> zn = z;
    for (std::size_t j = 0; j < d; ++j) zn[j] -= step * g[j];
    clamp(zn);
    double gm = 0.0;
    for (std::size_t j = 0; j < d; ++j) gm += (zn[j] - z[j]) * (zn[j] - z[j]);
    z = zn;
    double fz = f(z);
    if (!std::isfinite(fz)) throw std::runtime_error("dro solver: non-finite objective");
    if (fz < best_f) {
      best_f = fz;
      best_z = z;
    }
    if (std::sqrt(gm) < 1e-8 * step) break;
  }
  z = best_z;
  for (int sweep = 0; sweep < 40; ++sweep) {
    for (std::size_t j = 0; j < d; ++j) {
      double zj = golden_min(
          [&](double v) {
            std::vector<double> zt = z;
            zt[j] = v;
            return f(zt);
          },
          box[j].first, box[j].second, 1e-10 * (1.0 + box[j].second - box[j].first));
      z[j] = zj;
    }
    double fz = f(z);
    if (fz < best_f) {
      best_f = fz;
      best_z = z;
    }
  }
  return {best_z, best_f};
}

}  // namespace

SolveResult dro_solve_linear(const Matrix& scenarios, const RiskAversion& a,
                             const AmbiguityBall& ball,
                             const std::vector<std::pair<double, double>>& box,
                             std::size_t max_iter) {
  a.validate();
  ball.validate();
  if (box.empty()) throw std::invalid_argument("dro_solve_linear: empty box");
  for (const auto& row : scenarios)
    if (row.size() != box.size()) throw std::invalid_argument("dro_solve_linear: dimension mismatch");
  auto f = [&](const std::vector<double>& z) { return dro_value_linear(z, scenarios, a, ball); };
  auto grad = [&](const std::vector<double>& z) {
    const std::size_t N = scenarios.size();
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) v[i] = a.alpha * dot(z, scenarios[i]);
    double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
      x = std::exp(x - m);
      sum += x;
    }
    std::vector<double> g(z.size(), 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      double p = (a.alpha == 0.0) ? 1.0 / static_cast<double>(N) : v[i] / sum;
      for (std::size_t j = 0; j < z.size(); ++j) g[j] += p * scenarios[i][j];
    }
    std::vector<double> r = dual_norm_subgrad(z, ball.norm);
    for (std::size_t j = 0; j < z.size(); ++j) g[j] += ball.radius * r[j];
    return g;
  };
  return box_convex_solve(f, grad, box, max_iter);
}

ScalarSolveResult dro_solve_newsvendor(const NewsvendorSpec& spec, const ScenarioSet& s,
                                       const RiskAversion& a, double eps) {
  s.validate();
  a.validate();
  if (!(eps >= 0.0)) throw std::invalid_argument("dro_solve_newsvendor: eps must be nonnegative");
  if (spec.b < 0.0 || spec.h < 0.0)
    throw std::invalid_argument("dro_solve_newsvendor: costs must be nonnegative");
  auto value = [&](double z) {
    ScenarioSet worst;
    worst.losses.reserve(s.size());
    for (double xi : s.losses) {
      double over = spec.b * (xi + eps) + z * (spec.w - spec.b);
      double under = (eps - xi) * spec.h + z * (spec.w + spec.h);
      worst.losses.push_back(std::max(over, under));
    }
    return empirical_risk(worst, a);
  };
  double hi = *std::max_element(s.losses.begin(), s.losses.end()) + eps;
  hi = std::max(hi, 0.0);
  double z = golden_min(value, 0.0, hi, 1e-8);
  return {z, value(z)};
}

double dro_value_regression(const std::vector<double>& z, const RegressionData& data,
                            const RiskAversion& a, double eps, Norm norm) {
  a.validate();
  if (data.features.empty() || data.features.size() != data.labels.size())
    throw std::invalid_argument("dro_value_regression: malformed data");
  ScenarioSet s;
  s.losses.reserve(data.labels.size());
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (data.features[i].size() != z.size())
      throw std::invalid_argument("dro_value_regression: dimension mismatch");
    s.losses.push_back(std::fabs(data.labels[i] - dot(z, data.features[i])));
  }
  std::vector<double> ext(z.size() + 1);
  ext[0] = -1.0;
  for (std::size_t j = 0; j < z.size(); ++j) ext[j + 1] = z[j];
  return empirical_risk(s, a) + eps * dual_norm(ext, norm);
}

SolveResult dro_solve_regression(const RegressionData& data, const RiskAversion& a, double eps,
                                 Norm norm, std::size_t max_iter) {
  a.validate();
  if (data.features.empty() || data.features.size() != data.labels.size())
    throw std::invalid_argument("dro_solve_regression: malformed data");
  const std::size_t d = data.features[0].size();
  // generous box around the least-squares scale of the problem
  double ymax = 0.0, xmax = 0.0;
  for (double y : data.labels) ymax = std::max(ymax, std::fabs(y));
  for (const auto& row : data.features)
    for (double x : row) xmax = std::max(xmax, std::fabs(x));
  double bound = 10.0 * (1.0 + ymax) / std::max(1e-6, xmax) + 10.0;
  std::vector<std::pair<double, double>> box(d, {-bound, bound});

  auto f = [&](const std::vector<double>& z) {
    return dro_value_regression(z, data, a, eps, norm);
  };
  auto grad = [&](const std::vector<double>& z) {
    const std::size_t N = data.labels.size();
    std::vector<double> r(N), v(N);
    for (std::size_t i = 0; i < N; ++i) {
      r[i] = data.labels[i] - dot(z, data.features[i]);
      v[i] = a.alpha * std::fabs(r[i]);
    }
    double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
      x = std::exp(x - m);
      sum += x;
    }
    std::vector<double> g(d, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      double p = (a.alpha == 0.0) ? 1.0 / static_cast<double>(N) : v[i] / sum;
      double sgn = (r[i] > 0.0) ? 1.0 : (r[i] < 0.0 ? -1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) g[j] -= p * sgn * data.features[i][j];
    }
    std::vector<double> ext(d + 1);
    ext[0] = -1.0;
    for (std::size_t j = 0; j < d; ++j) ext[j + 1] = z[j];
    std::vector<double> rg = dual_norm_subgrad(ext, norm);
    for (std::size_t j = 0; j < d; ++j) g[j] += eps * rg[j + 1];
    return g;
  };
  return box_convex_solve(f, grad, box, max_iter);
}

std::optional<double> fenchel_constraint_value(
    const std::vector<double>& xi_hat, const std::vector<double>& phi,
    const std::function<std::optional<double>(const std::vector<double>&)>& conjugate, double eps,
    Norm norm) {
  if (xi_hat.size() != phi.size())
    throw std::invalid_argument("fenchel_constraint_value: dimension mismatch");
  std::optional<double> c = conjugate(phi);
  if (!c) return std::nullopt;
  return dot(phi, xi_hat) - *c + eps * dual_norm(phi, norm);
}

}  // namespace entrisk
