#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "entrisk/common.hpp"
#include "entrisk/types.hpp"

namespace entrisk {

enum class Norm { L1, L2, LINF };

struct AmbiguityBall {
  double radius = 0.0;
  Norm norm = Norm::L2;

  void validate() const {
    if (!(radius >= 0.0)) throw std::invalid_argument("AmbiguityBall: radius must be nonnegative");
  }
};

struct PiecewiseLinearLoss {
  // loss(u) = max_k (a_k * u + b_k)
  std::vector<std::pair<double, double>> pieces;
};

struct NewsvendorSpec {
  double w = 0.0;  // order cost
  double b = 0.0;  // backorder cost
  double h = 0.0;  // holding cost
};

struct RegressionData {
  Matrix features;  // rows of d-vectors
  std::vector<double> labels;
};

double dual_norm(const std::vector<double>& v, Norm norm);

// Worst-case risk of the linear loss z'xi over the radius-eps ball
// around each scenario: empirical risk of z'xi_hat plus eps ||z||_*.
double dro_value_linear(const std::vector<double>& z, const Matrix& scenarios,
                        const RiskAversion& a, const AmbiguityBall& ball);

// Same for loss max_k (a_k z'xi + b_k); the per-scenario sup lands on
// one piece pushed to its worst point within the ball.
double dro_value_piecewise(const std::vector<double>& z, const PiecewiseLinearLoss& loss,
                           const Matrix& scenarios, const RiskAversion& a,
                           const AmbiguityBall& ball);

// Grid/endpoint enumeration of the per-scenario sup for d <= 3;
// reference oracle for the closed forms above.
double worst_case_brute(const std::vector<double>& z,
                        const std::function<double(const std::vector<double>&)>& loss,
                        const Matrix& scenarios, const RiskAversion& a, const AmbiguityBall& ball,
                        std::size_t grid);

struct SolveResult {
  std::vector<double> z;
  double value = 0.0;
};

// Projected subgradient descent on dro_value_linear over a box.
SolveResult dro_solve_linear(const Matrix& scenarios, const RiskAversion& a,
                             const AmbiguityBall& ball,
                             const std::vector<std::pair<double, double>>& box,
                             std::size_t max_iter = 5000);

struct ScalarSolveResult {
  double z = 0.0;
  double value = 0.0;
};

// Order quantity minimizing the worst-case risk of
// w z + b (xi - z)_+ + h (z - xi)_+ with demand perturbed by at most
// eps; golden-section search on [0, max xi + eps].
ScalarSolveResult dro_solve_newsvendor(const NewsvendorSpec& spec, const ScenarioSet& s,
                                       const RiskAversion& a, double eps);

// Minimizes the worst-case risk of |y - x'z| with joint (x, y)
// perturbations; value = risk + eps ||(-1, z)||_*.
SolveResult dro_solve_regression(const RegressionData& data, const RiskAversion& a, double eps,
                                 Norm norm, std::size_t max_iter = 5000);

double dro_value_regression(const std::vector<double>& z, const RegressionData& data,
                            const RiskAversion& a, double eps, Norm norm);

// Left side of one dual constraint: phi'xi_hat - conjugate(phi) +
// eps ||phi||_*; nullopt when the conjugate is -infinity there.
std::optional<double> fenchel_constraint_value(
    const std::vector<double>& xi_hat, const std::vector<double>& phi,
    const std::function<std::optional<double>(const std::vector<double>&)>& conjugate, double eps,
    Norm norm);

}  // namespace entrisk
