#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "entrisk/dro.hpp"
#include "entrisk/risk.hpp"
#include "entrisk/rng.hpp"

using namespace entrisk;

TEST_CASE("dual norms") {
  CHECK(dual_norm({3.0, 4.0}, Norm::L2) == doctest::Approx(5.0));
  CHECK(dual_norm({3.0, -4.0}, Norm::L1) == doctest::Approx(4.0));
  CHECK(dual_norm({3.0, -4.0}, Norm::LINF) == doctest::Approx(7.0));
}

TEST_CASE("robust value of a linear loss") {
  Matrix scen = {{1.0, 2.0}};
  RiskAversion a{1.0};
  CHECK(dro_value_linear({1.0, 1.0}, scen, a, {0.0, Norm::L2}) == doctest::Approx(3.0));
  CHECK(dro_value_linear({0.0, 0.0}, scen, a, {2.0, Norm::L2}) == doctest::Approx(0.0));
  CHECK(dro_value_linear({1.0, 1.0}, scen, a, {0.5, Norm::L2}) ==
        doctest::Approx(3.0 + 0.5 * std::sqrt(2.0)).epsilon(1e-12));

  Matrix multi = {{0.5}, {1.5}, {-0.2}};
  ScenarioSet s;
  for (const auto& row : multi) s.losses.push_back(2.0 * row[0]);
  CHECK(dro_value_linear({2.0}, multi, a, {0.0, Norm::L2}) ==
        doctest::Approx(empirical_risk(s, a)).epsilon(1e-12));
}

TEST_CASE("robust value of a piecewise-linear loss") {
  RiskAversion a{1.3};
  Matrix scen = {{0.4}, {-1.0}, {2.2}};
  PiecewiseLinearLoss single{{{1.0, 0.0}}};
  for (double eps : {0.0, 0.3, 1.0})
    CHECK(dro_value_piecewise({1.7}, single, scen, a, {eps, Norm::L2}) ==
          doctest::Approx(dro_value_linear({1.7}, scen, a, {eps, Norm::L2})).epsilon(1e-12));

  PiecewiseLinearLoss pw{{{1.0, 0.0}, {-0.5, 0.7}}};
  ScenarioSet plain;
  for (const auto& row : scen)
    plain.losses.push_back(std::max(1.0 * 1.7 * row[0], -0.5 * 1.7 * row[0] + 0.7));
  CHECK(dro_value_piecewise({1.7}, pw, scen, a, {0.0, Norm::L2}) ==
        doctest::Approx(empirical_risk(plain, a)).epsilon(1e-12));
}

TEST_CASE("piecewise value agrees with the brute-force oracle") {
  Rng rng(91);
  for (int t = 0; t < 25; ++t) {
    Matrix scen = {{rng.normal()}, {rng.normal()}, {rng.normal()}};
    PiecewiseLinearLoss pw{{{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}}};
    double z = 0.5 + rng.uniform();
    double eps = rng.uniform();
    RiskAversion a{0.5 + rng.uniform()};
    AmbiguityBall ball{eps, Norm::L2};
    auto loss = [&](const std::vector<double>& xi) {
      double u = z * xi[0];
      double best = -1e300;
      for (auto [ak, bk] : pw.pieces) best = std::max(best, ak * u + bk);
      return best;
    };
    double brute = worst_case_brute({z}, loss, scen, a, ball, 2);
    CHECK(dro_value_piecewise({z}, pw, scen, a, ball) == doctest::Approx(brute).epsilon(1e-6));
  }
}

TEST_CASE("brute-force oracle") {
  RiskAversion a{1.0};
  Matrix scen = {{0.7}, {-0.3}};
  auto linear = [](const std::vector<double>& xi) { return 2.0 * xi[0]; };
  CHECK(worst_case_brute({2.0}, linear, scen, a, {0.0, Norm::L2}, 5) ==
        doctest::Approx(dro_value_linear({2.0}, scen, a, {0.0, Norm::L2})).epsilon(1e-12));
  // monotone linear loss: the worst point is the right endpoint
  ScenarioSet shifted;
  for (const auto& row : scen) shifted.losses.push_back(2.0 * (row[0] + 1.0));
  CHECK(worst_case_brute({2.0}, linear, scen, a, {1.0, Norm::L2}, 2) ==
        doctest::Approx(empirical_risk(shifted, a)).epsilon(1e-12));

  Rng rng(92);
  for (int t = 0; t < 20; ++t) {
    Matrix s = {{rng.normal()}, {rng.normal()}, {rng.normal()}};
    double z = rng.normal();
    double eps = rng.uniform();
    auto loss = [&](const std::vector<double>& xi) { return z * xi[0]; };
    CHECK(worst_case_brute({z}, loss, s, a, {eps, Norm::L2}, 2) ==
          doctest::Approx(dro_value_linear({z}, s, a, {eps, Norm::L2})).epsilon(1e-9));
  }

  // two dimensions, L2 ball, fine grid
  Matrix s2 = {{0.2, -0.5}, {1.0, 0.3}};
  std::vector<double> z2 = {0.8, -0.4};
  auto loss2 = [&](const std::vector<double>& xi) { return z2[0] * xi[0] + z2[1] * xi[1]; };
  double closed = dro_value_linear(z2, s2, a, {0.7, Norm::L2});
  double brute = worst_case_brute(z2, loss2, s2, a, {0.7, Norm::L2}, 201);
  CHECK(std::fabs(closed - brute) <= 5e-3);  // lattice discretization error
  CHECK(brute <= closed + 1e-12);

  CHECK_THROWS_AS(worst_case_brute({1.0, 1.0, 1.0, 1.0}, loss2, Matrix{{0., 0., 0., 0.}}, a,
                                   {1.0, Norm::L2}, 2),
                  std::invalid_argument);
}

TEST_CASE("linear solver") {
  RiskAversion a{1.0};
  Rng rng(93);
  Matrix scen(30, std::vector<double>(2));
  for (auto& row : scen)
    for (double& x : row) x = std::fabs(rng.normal()) + 0.1;
  std::vector<std::pair<double, double>> box = {{0.0, 1.0}, {0.0, 1.0}};

  SolveResult big = dro_solve_linear(scen, a, {100.0, Norm::L2}, box);
  CHECK(big.z[0] == doctest::Approx(0.0).epsilon(1e-4));
  CHECK(big.z[1] == doctest::Approx(0.0).epsilon(1e-4));

  SolveResult zero = dro_solve_linear(scen, a, {0.0, Norm::L2}, box);
  CHECK(zero.z[0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(zero.z[1] == doctest::Approx(0.0).epsilon(1e-6));

  // mixed-sign scenarios give an interior optimum; check stationarity
  Matrix mixed(40, std::vector<double>(2));
  Rng rng2(94);
  for (auto& row : mixed)
    for (double& x : row) x = rng2.normal() - 0.3;
  AmbiguityBall ball{0.05, Norm::L2};
  SolveResult r = dro_solve_linear(mixed, a, ball, box);
  // numeric KKT: the objective cannot improve along any feasible coordinate move
  const double h = 1e-5;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> up = r.z, dn = r.z;
    up[j] = std::min(1.0, up[j] + h);
    dn[j] = std::max(0.0, dn[j] - h);
    CHECK(dro_value_linear(up, mixed, a, ball) >= r.value - 1e-4 * h);
    CHECK(dro_value_linear(dn, mixed, a, ball) >= r.value - 1e-4 * h);
  }
}

TEST_CASE("newsvendor solver") {
  ScenarioSet one{std::vector<double>{5.0}};
  ScalarSolveResult exact = dro_solve_newsvendor({0.0, 1.0, 1.0}, one, {1.0}, 0.0);
  CHECK(exact.z == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(exact.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));

  // endpoint oracle at eps = 1: demand moves to 4 or 6
  ScalarSolveResult robust = dro_solve_newsvendor({0.0, 1.0, 1.0}, one, {1.0}, 1.0);
  auto loss = [&](const std::vector<double>& xi) {
    return std::max(1.0 * (xi[0] - robust.z), 1.0 * (robust.z - xi[0]));
  };
  double brute = worst_case_brute({1.0}, loss, Matrix{{5.0}}, {1.0}, {1.0, Norm::L2}, 2);
  CHECK(robust.value == doctest::Approx(brute).epsilon(1e-6));

  ScenarioSet many{std::vector<double>{2.0, 5.0, 3.0}};
  ScalarSolveResult free_disposal = dro_solve_newsvendor({1.0, 0.0, 0.0}, many, {1.0}, 0.5);
  CHECK(free_disposal.z == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(free_disposal.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("regression solver") {
  RegressionData fit;
  fit.features = {{1.0}, {2.0}, {3.0}};
  fit.labels = {2.0, 4.0, 6.0};
  SolveResult r = dro_solve_regression(fit, {1.0}, 0.0, Norm::L2);
  CHECK(r.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(r.z[0] == doctest::Approx(2.0).epsilon(1e-4));

  RegressionData one;
  one.features = {{1.0}};
  one.labels = {2.0};
  CHECK(dro_value_regression({2.0}, one, {1.0}, 0.5, Norm::L2) ==
        doctest::Approx(0.5 * std::sqrt(5.0)).epsilon(1e-12));

  // eps = 0 is the plain entropic regression objective
  RegressionData data;
  Rng rng(95);
  for (int i = 0; i < 12; ++i) {
    double x = rng.normal();
    data.features.push_back({x});
    data.labels.push_back(1.5 * x + 0.3 * rng.normal());
  }
  double z = 1.2;
  ScenarioSet abs_losses;
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    abs_losses.losses.push_back(std::fabs(data.labels[i] - z * data.features[i][0]));
  CHECK(dro_value_regression({z}, data, {2.0}, 0.0, Norm::L2) ==
        doctest::Approx(empirical_risk(abs_losses, {2.0})).epsilon(1e-12));
}

TEST_CASE("dual constraint evaluator") {
  // overage branch of the newsvendor: conjugate z(b - w) at phi = b
  double w = 0.4, b = 1.3, z = 2.0, eps = 0.6, xi = 5.0;
  auto conj = [&](const std::vector<double>& phi) -> std::optional<double> {
    if (std::fabs(phi[0] - b) > 1e-12) return std::nullopt;
    return z * (b - w);
  };
  auto v = fenchel_constraint_value({xi}, {b}, conj, eps, Norm::L2);
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(b * (xi + eps) + z * (w - b)).epsilon(1e-12));
  CHECK_FALSE(fenchel_constraint_value({xi}, {b + 1.0}, conj, eps, Norm::L2).has_value());

  auto zero_conj = [](const std::vector<double>&) -> std::optional<double> { return 0.0; };
  CHECK(*fenchel_constraint_value({1.0, 2.0}, {0.0, 0.0}, zero_conj, 0.7, Norm::L2) ==
        doctest::Approx(0.0));

  // first regression constraint: phi = (-z, 1), conjugate 0
  double zr = 0.8, x = 1.7, y = 2.2, epsr = 0.3;
  auto vr = fenchel_constraint_value({x, y}, {-zr, 1.0}, zero_conj, epsr, Norm::L2);
  REQUIRE(vr.has_value());
  CHECK(*vr == doctest::Approx(y - zr * x + epsr * std::sqrt(1.0 + zr * zr)).epsilon(1e-12));
}

TEST_CASE("radius monotonicity and the Lipschitz sandwich") {
  Rng rng(96);
  RiskAversion a{1.1};
  Matrix scen(15, std::vector<double>(2));
  for (auto& row : scen)
    for (double& x : row) x = rng.normal();
  std::vector<double> z = {0.6, -0.9};
  double prev = -1e300;
  for (double eps : {0.0, 0.2, 0.5, 1.0, 3.0}) {
    double v = dro_value_linear(z, scen, a, {eps, Norm::L2});
    CHECK(v >= prev - 1e-12);
    prev = v;
  }

  std::vector<std::pair<double, double>> box = {{0.0, 1.0}, {0.0, 1.0}};
  double eps = 0.4;
  SolveResult saa_opt = dro_solve_linear(scen, a, {0.0, Norm::L2}, box);
  SolveResult rob = dro_solve_linear(scen, a, {eps, Norm::L2}, box);
  double lip = std::sqrt(2.0);  // sup of ||z||_2 over the box
  CHECK(rob.value >= saa_opt.value - 1e-6);
  CHECK(rob.value <= saa_opt.value + lip * eps + 1e-6);
}

TEST_CASE("solver value matches a dense scan in one dimension") {
  Rng rng(97);
  Matrix scen(25, std::vector<double>(1));
  for (auto& row : scen) row[0] = rng.normal();
  RiskAversion a{1.4};
  AmbiguityBall ball{0.15, Norm::L2};
  std::vector<std::pair<double, double>> box = {{0.0, 1.0}};
  SolveResult r = dro_solve_linear(scen, a, ball, box);
  double best = 1e300;
  for (int i = 0; i <= 4000; ++i)
    best = std::min(best, dro_value_linear({i / 4000.0}, scen, a, ball));
  CHECK(r.value <= best + 1e-5);
}
