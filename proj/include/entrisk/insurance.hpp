#pragma once

#include <cstdint>
#include <vector>

#include "entrisk/common.hpp"
#include "entrisk/dro.hpp"
#include "entrisk/types.hpp"

namespace entrisk {

struct InsuranceInstance {
  std::size_t households = 0;          // M
  double alpha0 = 1.0;                 // insurer risk aversion
  std::vector<double> alphas;          // household risk aversions
  std::vector<GammaSpec> marginals;    // per-household loss distributions
  double r = 0.0;                      // copula correlation

  void validate() const;
};

struct Policy {
  std::vector<double> coverage;  // z in [0,1]^M
  std::vector<double> premium;   // pi >= 0
};

struct MarketData {
  Matrix joint;  // N x M losses; household h sees column h

  std::vector<double> column(std::size_t h) const;
};

MarketData generate_market(const InsuranceInstance& inst, std::size_t n, std::uint64_t seed);

// Largest premium household h accepts for coverage share zh: the
// entropic-risk gap between its uninsured and retained losses.
double premium(double zh, const ScenarioSet& col, const RiskAversion& ah);

// Insurer's regularized objective: risk of the covered portfolio
// minus collected premiums plus eps ||z||_*.
double insurer_objective(const std::vector<double>& z, const MarketData& data,
                         const InsuranceInstance& inst, double eps, Norm norm);

// Analytic gradient at interior points (regularizer by subgradient).
std::vector<double> insurer_gradient(const std::vector<double>& z, const MarketData& data,
                                     const InsuranceInstance& inst, double eps, Norm norm);

// Projected gradient descent over [0,1]^M followed by coordinate
// polish; premiums filled in at z*. The polish knobs trade accuracy
// for speed in inner cross-validation loops.
Policy solve_pricing(const MarketData& data, const InsuranceInstance& inst, double eps, Norm norm,
                     std::size_t max_iter = 5000, std::size_t polish_sweeps = 12,
                     double polish_tol = 1e-9);

// Risk of z'xi - sum(pi) over the test rows at the insurer's alpha.
double out_of_sample_risk(const Policy& policy, const Matrix& test, double alpha0);

}  // namespace entrisk
