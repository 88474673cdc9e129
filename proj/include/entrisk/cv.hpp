#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "entrisk/common.hpp"
#include "entrisk/estimators.hpp"
#include "entrisk/types.hpp"

namespace entrisk {

enum class BiasMethod { NONE, BS_MLE, BS_MATCH, BS_EVT };

const char* bias_method_name(BiasMethod m);

struct CvConfig {
  std::size_t folds = 5;
  std::vector<double> radius_grid;  // nonempty, ascending
  std::size_t bootstrap_reps = 500;
  BiasMethod method = BiasMethod::NONE;
  std::uint64_t seed = 0;
  bool shuffle = false;  // seeded permutation instead of strided folds
  // settings for the method's mixture fit on the pooled losses
  std::size_t em_components = 2;
  std::size_t em_max_iter = 500;
  double em_tol = 1e-8;
  RiskMatchConfig risk_match;  // bins == 0 means defaults for |S|
};

struct CvGridPoint {
  double epsilon = 0.0;
  ScenarioSet pooled;      // held-out losses, fold-major order
  double rho_folds = 0.0;  // risk of the per-fold risks
  double rho_pooled = 0.0; // plain risk of the pooled losses (logged)
  double delta = 0.0;
  double corrected = 0.0;
};

struct CvResult {
  std::vector<CvGridPoint> points;
  double epsilon_star = 0.0;
};

// Maps (training rows, epsilon) to a loss evaluator on scenario rows.
using SolverCallback =
    std::function<std::function<double(const std::vector<double>&)>(const Matrix&, double)>;

struct KfoldOutput {
  ScenarioSet pooled;
  double rho_folds = 0.0;
  double rho_pooled = 0.0;
};

// Strided folds (row i to fold i % K, optionally after a seeded
// shuffle); trains on each complement, evaluates the decision's loss
// on the held-out rows, and aggregates the per-fold risks.
KfoldOutput kfold_cv(const Matrix& data, std::size_t K, double eps, const SolverCallback& solver,
                     const RiskAversion& a, bool shuffle = false, std::uint64_t seed = 0);

// For each radius: K-fold CV, a bias fit on the pooled losses, and
// the corrected risk; picks the argmin, ties toward the larger radius.
CvResult tune_radius(const Matrix& data, const CvConfig& cfg, const SolverCallback& solver,
                     const RiskAversion& a);

// Serializes a result as CSV (epsilon, rho_raw, rho_pooled, delta,
// rho_corrected, chosen).
std::string cv_result_csv(const CvResult& r);

}  // namespace entrisk
