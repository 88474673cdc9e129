#include "entrisk/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "entrisk/common.hpp"
#include "entrisk/distributions.hpp"
#include "entrisk/risk.hpp"
#include "entrisk/rng.hpp"

namespace entrisk {

double saa(const ScenarioSet& s, const RiskAversion& a) { return empirical_risk(s, a); }

double loocv(const ScenarioSet& s, const RiskAversion& a) {
  s.validate();
  a.validate();
  const std::size_t N = s.size();
  if (N < 2) throw std::invalid_argument("loocv: needs at least 2 scenarios");
  if (a.alpha <= 0.0) throw std::invalid_argument("loocv: requires alpha > 0");
  // Work with E_i = exp(alpha l_i - m) so the leave-one-out risk and
  // the held-out loss share one stable shift.
  double m = -std::numeric_limits<double>::infinity();
  for (double l : s.losses) m = std::max(m, a.alpha * l);
  std::vector<double> E(N);
  double S = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    E[i] = std::exp(a.alpha * s.losses[i] - m);
    S += E[i];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double rest = S - E[i];
    double t_i = (m + std::log(rest / static_cast<double>(N - 1))) / a.alpha;
    // exp(alpha(l_i - t_i)) = E_i (N-1) / rest
    total += t_i + (E[i] * static_cast<double>(N - 1) / rest - 1.0) / a.alpha;
  }
  return total / static_cast<double>(N);
}

double oic(const ScenarioSet& s, const RiskAversion& a) {
  s.validate();
  a.validate();
  const std::size_t N = s.size();
  if (N < 2) throw std::invalid_argument("oic: needs at least 2 scenarios");
  if (a.alpha <= 0.0) throw std::invalid_argument("oic: requires alpha > 0");
  double m = -std::numeric_limits<double>::infinity();
  for (double l : s.losses) m = std::max(m, a.alpha * l);
  // variance and mean of exp(alpha l - m); the shift cancels in Var/mean^2
  double s1 = 0.0, s2 = 0.0;
  for (double l : s.losses) {
    double e = std::exp(a.alpha * l - m);
    s1 += e;
    s2 += e * e;
  }
  double mu = s1 / static_cast<double>(N);
  double var = s2 / static_cast<double>(N) - mu * mu;
  if (var < 0.0) var = 0.0;
  return saa(s, a) + var / (static_cast<double>(N) * a.alpha * mu * mu);
}

double mom(const ScenarioSet& s, const RiskAversion& a) {
  s.validate();
  a.validate();
  const std::size_t N = s.size();
  const std::size_t B = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(N)))));
  std::vector<double> risks(B);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t len = N / B + (b < N % B ? 1 : 0);
    ScenarioSet blk;
    blk.losses.assign(s.losses.begin() + pos, s.losses.begin() + pos + len);
    risks[b] = empirical_risk(blk, a);
    pos += len;
  }
  return median(risks);
}

double bootstrap_classic(const ScenarioSet& s, const RiskAversion& a, std::size_t reps,
                         std::uint64_t seed) {
  s.validate();
  a.validate();
  if (reps < 1) throw std::invalid_argument("bootstrap_classic: reps must be >= 1");
  const std::size_t N = s.size();
  std::vector<double> vals(reps);
  parallel_for_indexed(reps, [&](std::size_t r) {
    Rng rng(child_seed(seed, r));
    ScenarioSet re;
    re.losses.resize(N);
    for (std::size_t i = 0; i < N; ++i) re.losses[i] = s.losses[rng.below(N)];
    vals[r] = empirical_risk(re, a);
  });
  return mean(vals);
}

BiasCorrection bias_correct(const ScenarioSet& s, const RiskAversion& a, const Gmm& fitted,
                            std::size_t reps, std::uint64_t seed) {
  s.validate();
  a.validate();
  fitted.validate();
  if (reps < 1) throw std::invalid_argument("bias_correct: reps must be >= 1");
  const double rho_q = gmm_risk(fitted, a);
  const std::size_t N = s.size();
  std::vector<double> gaps(reps);
  parallel_for_indexed(reps, [&](std::size_t r) {
    ScenarioSet draw = gmm_sample(fitted, N, child_seed(seed, r));
    gaps[r] = rho_q - empirical_risk(draw, a);
  });
  BiasCorrection out;
  out.delta_hat = median(gaps);
  out.reps = reps;
  out.fitted = fitted;
  return out;
}

double estimate(EstimatorKind kind, const ScenarioSet& s, const RiskAversion& a,
                const EstimatorConfig& cfg) {
  switch (kind) {
    case EstimatorKind::SAA:
      return saa(s, a);
    case EstimatorKind::LOOCV:
      return loocv(s, a);
    case EstimatorKind::OIC:
      return oic(s, a);
    case EstimatorKind::MOM:
      return mom(s, a);
    case EstimatorKind::BS:
      return bootstrap_classic(s, a, cfg.bootstrap_reps, child_seed(cfg.seed, 101));
    case EstimatorKind::MLE: {
      Gmm q = gmm_fit_em(s, cfg.em_components, cfg.em_max_iter, cfg.em_tol,
                         child_seed(cfg.seed, 102));
      return gmm_risk(q, a);
    }
    case EstimatorKind::BS_MLE: {
      Gmm q = gmm_fit_em(s, cfg.em_components, cfg.em_max_iter, cfg.em_tol,
                         child_seed(cfg.seed, 102));
      return saa(s, a) +
             bias_correct(s, a, q, cfg.bootstrap_reps, child_seed(cfg.seed, 103)).delta_hat;
    }
    case EstimatorKind::BS_MATCH: {
      RiskMatchConfig rm = cfg.risk_match;
      if (rm.bins == 0) {
        std::size_t B = risk_match_default(s.size()).bins;
        rm.bins = B;
        rm.model_bins = 4 * B;
      }
      Gmm q = fit_gmm_risk_match(s, a, rm, child_seed(cfg.seed, 104));
      return saa(s, a) +
             bias_correct(s, a, q, cfg.bootstrap_reps, child_seed(cfg.seed, 103)).delta_hat;
    }
    case EstimatorKind::BS_EVT: {
      Gmm q = fit_gmm_evt(s);
      return saa(s, a) +
             bias_correct(s, a, q, cfg.bootstrap_reps, child_seed(cfg.seed, 103)).delta_hat;
    }
  }
  throw std::invalid_argument("estimate: unknown estimator kind");
}

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::SAA: return "saa";
    case EstimatorKind::LOOCV: return "loocv";
    case EstimatorKind::OIC: return "oic";
    case EstimatorKind::MLE: return "mle";
    case EstimatorKind::MOM: return "mom";
    case EstimatorKind::BS: return "bs";
    case EstimatorKind::BS_MLE: return "bs_mle";
    case EstimatorKind::BS_MATCH: return "bs_match";
    case EstimatorKind::BS_EVT: return "bs_evt";
  }
  return "unknown";
}

}  // namespace entrisk
