#pragma once

#include <cstdint>

#include "entrisk/fitting.hpp"
#include "entrisk/types.hpp"

namespace entrisk {

enum class EstimatorKind { SAA, LOOCV, OIC, MLE, MOM, BS, BS_MLE, BS_MATCH, BS_EVT };

struct BiasCorrection {
  double delta_hat = 0.0;
  std::size_t reps = 0;
  Gmm fitted;
};

struct EstimatorConfig {
  std::size_t bootstrap_reps = 500;  // M
  std::size_t em_components = 2;
  std::size_t em_max_iter = 500;
  double em_tol = 1e-8;
  RiskMatchConfig risk_match;  // bins == 0 means use risk_match_default(N)
  std::uint64_t seed = 0;
};

// Plain empirical risk.
double saa(const ScenarioSet& s, const RiskAversion& a);

// Average held-out certainty-equivalent loss with the leave-one-out
// risk as the per-point anchor.
double loocv(const ScenarioSet& s, const RiskAversion& a);

// SAA plus the first-order optimism term Var(exp(alpha l)) / (N alpha mean^2).
double oic(const ScenarioSet& s, const RiskAversion& a);

// Median of per-block risks over floor(sqrt(N)) contiguous blocks.
double mom(const ScenarioSet& s, const RiskAversion& a);

// Mean over reps resamples-with-replacement of the resample's risk.
double bootstrap_classic(const ScenarioSet& s, const RiskAversion& a, std::size_t reps,
                         std::uint64_t seed);

// Parametric bootstrap bias: median over reps of (closed-form risk of
// `fitted`) minus (empirical risk of N fresh draws from `fitted`).
BiasCorrection bias_correct(const ScenarioSet& s, const RiskAversion& a, const Gmm& fitted,
                            std::size_t reps, std::uint64_t seed);

// Dispatch over all estimator kinds; BS_* return saa + delta_hat with
// the mixture fitted by EM, risk matching, or block maxima.
double estimate(EstimatorKind kind, const ScenarioSet& s, const RiskAversion& a,
                const EstimatorConfig& cfg);

const char* estimator_name(EstimatorKind kind);

}  // namespace entrisk
