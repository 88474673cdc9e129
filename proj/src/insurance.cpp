#include "entrisk/insurance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "entrisk/distributions.hpp"
#include "entrisk/risk.hpp"

namespace entrisk {

void InsuranceInstance::validate() const {
  if (households < 1) throw std::invalid_argument("InsuranceInstance: needs at least 1 household");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("InsuranceInstance: alpha0 must be positive");
  if (alphas.size() != households || marginals.size() != households)
    throw std::invalid_argument("InsuranceInstance: field lengths must equal household count");
  for (double a : alphas)
    if (!(a > 0.0)) throw std::invalid_argument("InsuranceInstance: household alphas must be positive");
  for (const auto& g : marginals) g.validate();
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("InsuranceInstance: r must lie in [0,1]");
}

std::vector<double> MarketData::column(std::size_t h) const {
  std::vector<double> col(joint.size());
  for (std::size_t i = 0; i < joint.size(); ++i) col[i] = joint[i][h];
  return col;
}

MarketData generate_market(const InsuranceInstance& inst, std::size_t n, std::uint64_t seed) {
  inst.validate();
  CopulaSpec spec;
  spec.r = inst.r;
  spec.marginals = inst.marginals;
  MarketData data;
  data.joint = copula_sample(spec, n, seed);
  return data;
}

double premium(double zh, const ScenarioSet& col, const RiskAversion& ah) {
  col.validate();
  ah.validate();
  if (!(zh >= 0.0 && zh <= 1.0)) throw std::invalid_argument("premium: coverage must lie in [0,1]");
  if (ah.alpha <= 0.0) throw std::invalid_argument("premium: requires alpha > 0");
  std::vector<double> full(col.size()), kept(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    full[i] = ah.alpha * col.losses[i];
    kept[i] = ah.alpha * (1.0 - zh) * col.losses[i];
  }
  return (log_mean_exp(full) - log_mean_exp(kept)) / ah.alpha;
}

double insurer_objective(const std::vector<double>& z, const MarketData& data,
                         const InsuranceInstance& inst, double eps, Norm norm) {
  inst.validate();
  if (z.size() != inst.households) throw std::invalid_argument("insurer_objective: z length mismatch");
  if (data.joint.empty()) throw std::invalid_argument("insurer_objective: empty data");
  const std::size_t N = data.joint.size();
  std::vector<double> v(N);
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::size_t h = 0; h < z.size(); ++h) s += z[h] * data.joint[i][h];
    v[i] = inst.alpha0 * s;
  }
  double risk = log_mean_exp(v) / inst.alpha0;
  double premiums = 0.0;
  for (std::size_t h = 0; h < z.size(); ++h) {
    ScenarioSet col;
    col.losses = data.column(h);
    premiums += premium(z[h], col, RiskAversion{inst.alphas[h]});
  }
  return risk - premiums + eps * dual_norm(z, norm);
}

std::vector<double> insurer_gradient(const std::vector<double>& z, const MarketData& data,
                                     const InsuranceInstance& inst, double eps, Norm norm) {
  inst.validate();
  const std::size_t N = data.joint.size();
  const std::size_t M = z.size();
  std::vector<double> v(N);
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::size_t h = 0; h < M; ++h) s += z[h] * data.joint[i][h];
    v[i] = inst.alpha0 * s;
  }
  double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  std::vector<double> g(M, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double p = v[i] / sum;
    for (std::size_t h = 0; h < M; ++h) g[h] += p * data.joint[i][h];
  }
  // minus d premium_h / d z_h, a softmax over the retained losses
  for (std::size_t h = 0; h < M; ++h) {
    double ah = inst.alphas[h];
    std::vector<double> u(N);
    for (std::size_t i = 0; i < N; ++i) u[i] = ah * (1.0 - z[h]) * data.joint[i][h];
    double mu = *std::max_element(u.begin(), u.end());
    double su = 0.0;
    for (double& x : u) {
      x = std::exp(x - mu);
      su += x;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < N; ++i) d += (u[i] / su) * data.joint[i][h];
    g[h] -= d;
  }
  if (eps > 0.0) {
    switch (norm) {
      case Norm::L2: {
        double n2 = dual_norm(z, Norm::L2);
        if (n2 > 0.0)
          for (std::size_t h = 0; h < M; ++h) g[h] += eps * z[h] / n2;
        break;
      }
      case Norm::L1: {
        std::size_t best = 0;
        for (std::size_t h = 1; h < M; ++h)
          if (std::fabs(z[h]) > std::fabs(z[best])) best = h;
        if (z[best] != 0.0) g[best] += eps * (z[best] > 0.0 ? 1.0 : -1.0);
        break;
      }
      case Norm::LINF:
        for (std::size_t h = 0; h < M; ++h)
          if (z[h] != 0.0) g[h] += eps * (z[h] > 0.0 ? 1.0 : -1.0);
        break;
    }
  }
  return g;
}

Policy solve_pricing(const MarketData& data, const InsuranceInstance& inst, double eps, Norm norm,
                     std::size_t max_iter, std::size_t polish_sweeps, double polish_tol) {
  inst.validate();
  if (!(eps >= 0.0)) throw std::invalid_argument("solve_pricing: eps must be nonnegative");
  const std::size_t M = inst.households;
  auto f = [&](const std::vector<double>& z) {
    return insurer_objective(z, data, inst, eps, norm);
  };
  std::vector<double> z(M, 0.5);
  std::vector<double> best_z = z;
  double best_f = f(z);
  if (!std::isfinite(best_f)) throw std::runtime_error("solve_pricing: non-finite objective");
  for (std::size_t t = 1; t <= max_iter; ++t) {
    std::vector<double> g = insurer_gradient(z, data, inst, eps, norm);
    double step = 1.0 / std::sqrt(static_cast<double>(t));
    double gm = 0.0;
    for (std::size_t h = 0; h < M; ++h) {
      double zn = std::min(1.0, std::max(0.0, z[h] - step * g[h]));
      gm += (zn - z[h]) * (zn - z[h]);
      z[h] = zn;
    }
    double fz = f(z);
    if (!std::isfinite(fz))
      throw std::runtime_error("solve_pricing: non-finite objective at iteration " +
                               std::to_string(t));
    if (fz < best_f) {
      best_f = fz;
      best_z = z;
    }
    if (std::sqrt(gm) < 1e-7 * step) break;
  }
  // coordinate polish on the box
  z = best_z;
  const double gr = 0.6180339887498949;
  for (std::size_t sweep = 0; sweep < polish_sweeps; ++sweep) {
    for (std::size_t h = 0; h < M; ++h) {
      double a = 0.0, b = 1.0;
      auto fh = [&](double v) {
        std::vector<double> zt = z;
        zt[h] = v;
        return f(zt);
      };
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = fh(c), fd = fh(d);
      while (b - a > polish_tol) {
        if (fc <= fd) {
          b = d; d = c; fd = fc; c = b - gr * (b - a); fc = fh(c);
        } else {
          a = c; c = d; fc = fd; d = a + gr * (b - a); fd = fh(d);
        }
      }
      z[h] = 0.5 * (a + b);
    }
    double fz = f(z);
    if (fz < best_f) {
      best_f = fz;
      best_z = z;
    }
  }

  Policy out;
  out.coverage = best_z;
  out.premium.resize(M);
  for (std::size_t h = 0; h < M; ++h) {
    ScenarioSet col;
    col.losses = data.column(h);
    out.premium[h] = premium(best_z[h], col, RiskAversion{inst.alphas[h]});
  }
  return out;
}

double out_of_sample_risk(const Policy& policy, const Matrix& test, double alpha0) {
  if (test.empty()) throw std::invalid_argument("out_of_sample_risk: empty test data");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("out_of_sample_risk: alpha0 must be positive");
  const std::size_t M = policy.coverage.size();
  double total_premium = 0.0;
  for (double p : policy.premium) total_premium += p;
  ScenarioSet s;
  s.losses.reserve(test.size());
  for (const auto& row : test) {
    if (row.size() != M) throw std::invalid_argument("out_of_sample_risk: dimension mismatch");
    double v = 0.0;
    for (std::size_t h = 0; h < M; ++h) v += policy.coverage[h] * row[h];
    s.losses.push_back(v - total_premium);
  }
  return empirical_risk(s, RiskAversion{alpha0});
}

}  // namespace entrisk
