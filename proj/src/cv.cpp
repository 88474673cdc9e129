#include "entrisk/cv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "entrisk/distributions.hpp"
#include "entrisk/risk.hpp"
#include "entrisk/rng.hpp"

namespace entrisk {

const char* bias_method_name(BiasMethod m) {
  switch (m) {
    case BiasMethod::NONE: return "none";
    case BiasMethod::BS_MLE: return "bs_mle";
    case BiasMethod::BS_MATCH: return "bs_match";
    case BiasMethod::BS_EVT: return "bs_evt";
  }
  return "unknown";
}

KfoldOutput kfold_cv(const Matrix& data, std::size_t K, double eps, const SolverCallback& solver,
                     const RiskAversion& a, bool shuffle, std::uint64_t seed) {
  a.validate();
  const std::size_t N = data.size();
  if (K < 2) throw std::invalid_argument("kfold_cv: needs K >= 2");
  if (N < K) throw std::invalid_argument("kfold_cv: needs N >= K");

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    Rng rng(seed);
    for (std::size_t i = N - 1; i > 0; --i)
      std::swap(order[i], order[rng.below(i + 1)]);
  }

  KfoldOutput out;
  out.pooled.losses.reserve(N);
  std::vector<double> fold_risks(K);
  for (std::size_t k = 0; k < K; ++k) {
    Matrix train;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < N; ++i) {
      if (i % K == k)
        held.push_back(order[i]);
      else
        train.push_back(data[order[i]]);
    }
    auto loss = solver(train, eps);
    ScenarioSet fold;
    fold.losses.reserve(held.size());
    for (std::size_t idx : held) {
      double l = loss(data[idx]);
      fold.losses.push_back(l);
      out.pooled.losses.push_back(l);
    }
    fold_risks[k] = empirical_risk(fold, a);
  }

  if (a.alpha == 0.0) {
    out.rho_folds = mean(fold_risks);
  } else {
    std::vector<double> v(K);
    for (std::size_t k = 0; k < K; ++k) v[k] = a.alpha * fold_risks[k];
    out.rho_folds = log_mean_exp(v) / a.alpha;
  }
  out.rho_pooled = empirical_risk(out.pooled, a);
  return out;
}

CvResult tune_radius(const Matrix& data, const CvConfig& cfg, const SolverCallback& solver,
                     const RiskAversion& a) {
  if (cfg.radius_grid.empty()) throw std::invalid_argument("tune_radius: empty radius grid");
  if (!std::is_sorted(cfg.radius_grid.begin(), cfg.radius_grid.end()))
    throw std::invalid_argument("tune_radius: radius grid must be ascending");

  CvResult out;
  out.points.resize(cfg.radius_grid.size());
  parallel_for_indexed(cfg.radius_grid.size(), [&](std::size_t gi) {
    const double eps = cfg.radius_grid[gi];
    CvGridPoint pt;
    pt.epsilon = eps;
    KfoldOutput kf = kfold_cv(data, cfg.folds, eps, solver, a, cfg.shuffle,
                              child_seed(cfg.seed, 2 * gi));
    pt.pooled = kf.pooled;
    pt.rho_folds = kf.rho_folds;
    pt.rho_pooled = kf.rho_pooled;

    std::uint64_t bseed = child_seed(cfg.seed, 2 * gi + 1);
    switch (cfg.method) {
      case BiasMethod::NONE:
        pt.delta = 0.0;
        break;
      case BiasMethod::BS_MLE: {
        Gmm q = gmm_fit_em(pt.pooled, cfg.em_components, cfg.em_max_iter, cfg.em_tol,
                           child_seed(bseed, 0));
        pt.delta = bias_correct(pt.pooled, a, q, cfg.bootstrap_reps, child_seed(bseed, 1)).delta_hat;
        break;
      }
      case BiasMethod::BS_MATCH: {
        RiskMatchConfig rm = cfg.risk_match;
        if (rm.bins == 0) {
          RiskMatchConfig def = risk_match_default(pt.pooled.size());
          rm.bins = def.bins;
          rm.model_bins = def.model_bins;
        }
        Gmm q = fit_gmm_risk_match(pt.pooled, a, rm, child_seed(bseed, 0));
        pt.delta = bias_correct(pt.pooled, a, q, cfg.bootstrap_reps, child_seed(bseed, 1)).delta_hat;
        break;
      }
      case BiasMethod::BS_EVT: {
        Gmm q = fit_gmm_evt(pt.pooled);
        pt.delta = bias_correct(pt.pooled, a, q, cfg.bootstrap_reps, child_seed(bseed, 1)).delta_hat;
        break;
      }
    }
    pt.corrected = pt.rho_folds + pt.delta;
    out.points[gi] = std::move(pt);
  });

  std::size_t best = 0;
  for (std::size_t gi = 1; gi < out.points.size(); ++gi)
    if (out.points[gi].corrected <= out.points[best].corrected) best = gi;
  out.epsilon_star = out.points[best].epsilon;
  return out;
}

std::string cv_result_csv(const CvResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "epsilon,rho_raw,rho_pooled,delta,rho_corrected,chosen\n";
  for (const auto& pt : r.points)
    os << pt.epsilon << ',' << pt.rho_folds << ',' << pt.rho_pooled << ',' << pt.delta << ','
       << pt.corrected << ',' << (pt.epsilon == r.epsilon_star ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace entrisk
