#include "entrisk/risk.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "entrisk/common.hpp"

namespace entrisk {

double empirical_risk(const ScenarioSet& s, const RiskAversion& a) {
  s.validate();
  a.validate();
  if (a.alpha == 0.0) return mean(s.losses);
  std::vector<double> v(s.losses.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.alpha * s.losses[i];
  return log_mean_exp(v) / a.alpha;
}

double gamma_risk(const GammaSpec& g, const RiskAversion& a) {
  g.validate();
  a.validate();
  if (a.alpha == 0.0) return g.kappa * g.lambda;
  double la = g.lambda * a.alpha;
  if (la >= 1.0) throw std::domain_error("gamma_risk: moment-generating function diverges (lambda * alpha >= 1)");
  return -g.kappa * std::log(1.0 - la) / a.alpha;
}

double gmm_risk(const Gmm& q, const RiskAversion& a) {
  q.validate();
  a.validate();
  if (a.alpha == 0.0) return q.mean();
  std::vector<double> v(q.components());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = std::log(q.weights[k]) + a.alpha * q.means[k] +
           0.5 * a.alpha * a.alpha * q.stds[k] * q.stds[k];
  return log_sum_exp(v) / a.alpha;
}

double oce_loss(double t, double loss, const RiskAversion& a) {
  a.validate();
  if (a.alpha == 0.0) throw std::invalid_argument("oce_loss: requires alpha > 0");
  return t + std::exp(a.alpha * (loss - t)) / a.alpha - 1.0 / a.alpha;
}

double influence_function(double xi_hat, const RiskAversion& a, double mgf) {
  a.validate();
  if (a.alpha == 0.0) throw std::invalid_argument("influence_function: requires alpha > 0");
  if (!(mgf > 0.0)) throw std::invalid_argument("influence_function: mgf must be positive");
  return -1.0 / a.alpha + std::exp(a.alpha * xi_hat) / (a.alpha * mgf);
}

}  // namespace entrisk
