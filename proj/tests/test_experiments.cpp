#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "entrisk/experiments.hpp"
#include "entrisk/risk.hpp"

using namespace entrisk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("experiment names round-trip") {
  for (const char* n : {"fig1", "example2", "example3", "insurance_n_sweep", "insurance_r_sweep",
                        "insurance_hetero", "epsilon_curves"})
    CHECK(experiment_to_string(experiment_from_string(n)) == std::string(n));
  CHECK_THROWS_AS(experiment_from_string("nope"), std::invalid_argument);
}

TEST_CASE("double formatting round-trips") {
  for (double x : {0.0, 1.0, 0.1, -2.5, 1.0 / 3.0, 1e-17, 123456.789})
    CHECK(std::stod(fmt(x)) == x);
  CHECK(fmt(0.5) == "0.5");
}

TEST_CASE("risk-aversion sweep experiment writes well-formed output") {
  ExperimentConfig cfg;
  cfg.name = ExperimentName::fig1;
  cfg.reps = 2;
  cfg.seed = 7;
  cfg.out_dir = "exp_test_fig1";
  run(cfg);

  auto raw = parse_csv(slurp(fs::path(cfg.out_dir) / "fig1_raw.csv"));
  REQUIRE(raw.size() == 1 + 2 * 5);  // header + reps x alphas
  CHECK(raw[0] == std::vector<std::string>{"alpha", "rep", "estimate", "true_risk"});
  // the last alpha block carries the exact reference value
  bool saw_alpha2 = false;
  for (std::size_t i = 1; i < raw.size(); ++i) {
    REQUIRE(raw[i].size() == 4);
    if (raw[i][0] == "2") {
      saw_alpha2 = true;
      CHECK(std::stod(raw[i][3]) == doctest::Approx(-5.0 * std::log(0.52)).epsilon(1e-12));
    }
  }
  CHECK(saw_alpha2);

  auto summary = parse_csv(slurp(fs::path(cfg.out_dir) / "fig1_summary.csv"));
  REQUIRE(summary.size() == 6);
  CHECK(summary[0].size() == 6);

  nlohmann::json manifest =
      nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "manifest.json"));
  CHECK(manifest["experiment"] == "fig1");
  CHECK(manifest["repetitions"] == 2);
  CHECK(manifest["seed"] == 7);
  CHECK(manifest.contains("wall_time_seconds"));
  CHECK(manifest["files"].size() == 2);

  // same seed, same bytes
  ExperimentConfig cfg2 = cfg;
  cfg2.out_dir = "exp_test_fig1_b";
  run(cfg2);
  CHECK(slurp(fs::path(cfg.out_dir) / "fig1_raw.csv") ==
        slurp(fs::path(cfg2.out_dir) / "fig1_raw.csv"));
  CHECK(slurp(fs::path(cfg.out_dir) / "fig1_summary.csv") ==
        slurp(fs::path(cfg2.out_dir) / "fig1_summary.csv"));

  fs::remove_all(cfg.out_dir);
  fs::remove_all(cfg2.out_dir);
}

TEST_CASE("estimator comparison experiment records the reference risks") {
  ExperimentConfig cfg;
  cfg.name = ExperimentName::example3;
  cfg.reps = 1;
  cfg.seed = 3;
  cfg.scale = 0.2;  // shrink for test runtime
  cfg.out_dir = "exp_test_ex3";
  run(cfg);

  nlohmann::json manifest =
      nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "manifest.json"));
  Gmm g;
  g.weights = {0.16, 0.28, 0.23, 0.20, 0.13};
  g.means = {-19.5, -19.0, -18.5, -18.0, -17.5};
  g.stds = {4.0 / 25.0, 1.0 / 4.0, 4.0 / 9.0, 1.0, 4.0};
  std::vector<double> scales = {0.4, 0.6, 0.8};
  REQUIRE(manifest["true_risks"].size() == 3);
  for (std::size_t p = 0; p < 3; ++p) {
    Gmm gp = g;
    for (double& m : gp.means) m *= scales[p];
    for (double& s : gp.stds) s *= scales[p];
    CHECK(manifest["true_risks"][p].get<double>() ==
          doctest::Approx(gmm_risk(gp, {3.0})).epsilon(1e-12));
  }

  auto raw = parse_csv(slurp(fs::path(cfg.out_dir) / "example3_raw.csv"));
  REQUIRE(raw.size() == 1 + 3 * 9);  // header + projects x estimators
  CHECK(raw[0] == std::vector<std::string>{"rep", "project", "estimator", "estimate", "true_risk"});

  fs::remove_all(cfg.out_dir);
}

TEST_CASE("experiment output does not depend on the worker count") {
  ExperimentConfig cfg;
  cfg.name = ExperimentName::fig1;
  cfg.reps = 3;
  cfg.seed = 11;

  setenv("ENTRISK_THREADS", "1", 1);
  cfg.out_dir = "exp_test_t1";
  run(cfg);
  setenv("ENTRISK_THREADS", "4", 1);
  cfg.out_dir = "exp_test_t4";
  run(cfg);
  unsetenv("ENTRISK_THREADS");

  CHECK(slurp("exp_test_t1/fig1_raw.csv") == slurp("exp_test_t4/fig1_raw.csv"));
  CHECK(slurp("exp_test_t1/fig1_summary.csv") == slurp("exp_test_t4/fig1_summary.csv"));
  fs::remove_all("exp_test_t1");
  fs::remove_all("exp_test_t4");
}

TEST_CASE("shared-fold method comparison") {
  InsuranceInstance inst;
  inst.households = 2;
  inst.alpha0 = 2.0;
  inst.alphas = {2.9, 2.1};
  inst.marginals = {GammaSpec{10.0, 0.45}, GammaSpec{10.0, 0.45}};
  inst.r = 0.5;
  MarketData data = generate_market(inst, 60, 21);
  Matrix test = generate_market(inst, 500, 22).joint;
  std::vector<double> grid = {0.0, 1.0};
  std::vector<InsuranceRun> runs = run_insurance_methods(
      inst, data, test, grid, 3, {BiasMethod::NONE, BiasMethod::BS_EVT}, 9, 20, 50, 60);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].method == BiasMethod::NONE);
  CHECK(runs[1].method == BiasMethod::BS_EVT);
  for (const auto& run : runs) {
    CHECK((run.epsilon_star == 0.0 || run.epsilon_star == 1.0));
    CHECK(run.policy.coverage.size() == 2);
    CHECK(std::isfinite(run.out_of_sample));
    CHECK(std::isfinite(run.in_sample));
  }
  // same chosen radius implies the identical cached policy
  std::vector<InsuranceRun> again = run_insurance_methods(
      inst, data, test, grid, 3, {BiasMethod::NONE, BiasMethod::BS_EVT}, 9, 20, 50, 60);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    CHECK(runs[i].epsilon_star == again[i].epsilon_star);
    CHECK(runs[i].out_of_sample == doctest::Approx(again[i].out_of_sample));
  }
}
