#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "entrisk/cv.hpp"
#include "entrisk/distributions.hpp"
#include "entrisk/dro.hpp"
#include "entrisk/estimators.hpp"
#include "entrisk/experiments.hpp"
#include "entrisk/insurance.hpp"
#include "entrisk/risk.hpp"

using namespace entrisk;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Headerless single column of decimal reals, one per line.
std::vector<double> read_loss_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open loss file: " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    try {
      std::size_t pos = 0;
      double v = std::stod(line, &pos);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("malformed loss file line: " + line);
    }
  }
  if (out.empty()) throw UsageError("loss file is empty: " + path);
  return out;
}

// Headered CSV of decimal reals; the header row is skipped.
Matrix read_csv_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open CSV file: " + path);
  Matrix out;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw UsageError("malformed CSV cell: " + cell);
      }
    }
    if (!row.empty()) out.push_back(row);
  }
  if (out.empty()) throw UsageError("CSV file has no data rows: " + path);
  for (const auto& row : out)
    if (row.size() != out[0].size()) throw UsageError("ragged CSV rows in: " + path);
  return out;
}

Norm parse_norm(const std::string& s) {
  if (s == "l1") return Norm::L1;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::LINF;
  throw UsageError("unknown norm: " + s + " (expected l1, l2, or linf)");
}

BiasMethod parse_method(const std::string& s) {
  if (s == "none") return BiasMethod::NONE;
  if (s == "bs_mle") return BiasMethod::BS_MLE;
  if (s == "bs_match") return BiasMethod::BS_MATCH;
  if (s == "bs_evt") return BiasMethod::BS_EVT;
  throw UsageError("unknown bias method: " + s);
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw IoError("cannot open output file: " + out_path);
  f << content;
  if (!f) throw IoError("write failed: " + out_path);
}

void print_gmm(const Gmm& q) {
  std::cout << "component,weight,mean,std\n";
  for (std::size_t k = 0; k < q.components(); ++k)
    std::cout << k << ',' << fmt(q.weights[k]) << ',' << fmt(q.means[k]) << ','
              << fmt(q.stds[k]) << "\n";
}

int run_cli(int argc, char** argv) {
  CLI::App app{
      "Entropic risk estimation with bias-aware bootstrap correction, "
      "Wasserstein-robust optimization, and insurance pricing"};
  app.require_subcommand(1);

  double alpha = 1.0;
  double eps = 0.0;
  std::string norm_s = "l2";
  std::uint64_t seed = 0;
  std::size_t reps = 500;
  std::string out_path;

  // estimate
  auto* est = app.add_subcommand("estimate", "Print every point estimate of the entropic risk "
                                             "for a loss file (headerless single column)");
  std::string est_file;
  std::size_t est_components = 2;
  std::size_t est_match_iters = 3000;
  est->add_option("file", est_file, "loss file")->required();
  est->add_option("--alpha", alpha, "risk aversion");
  est->add_option("--reps", reps, "bootstrap repetitions M");
  est->add_option("--seed", seed, "root seed");
  est->add_option("--components", est_components, "mixture components for the fitted models");
  est->add_option("--match-iters", est_match_iters, "risk-matching iteration cap");

  // fit-gmm
  auto* fit = app.add_subcommand("fit-gmm", "Fit a Gaussian mixture to a loss file");
  std::string fit_method = "em";
  std::string fit_file;
  std::size_t fit_components = 2;
  std::size_t fit_iters = 3000;
  fit->add_option("method", fit_method, "em, match, or evt")->required();
  fit->add_option("file", fit_file, "loss file")->required();
  fit->add_option("--alpha", alpha, "risk aversion (match only)");
  fit->add_option("--components", fit_components, "mixture components (em, match)");
  fit->add_option("--iters", fit_iters, "iteration cap");
  fit->add_option("--seed", seed, "root seed");

  // dro
  auto* dro = app.add_subcommand("dro", "Solve a robust problem: linear (headered CSV of "
                                        "scenarios), newsvendor (loss file), or regression "
                                        "(headered CSV, label in the last column)");
  std::string dro_problem, dro_file;
  double nv_w = 0.0, nv_b = 1.0, nv_h = 1.0;
  dro->set_help_flag("--help", "print help");  // frees -h for the holding cost
  dro->add_option("problem", dro_problem, "linear, newsvendor, or regression")->required();
  dro->add_option("file", dro_file, "input data")->required();
  dro->add_option("--alpha", alpha, "risk aversion");
  dro->add_option("--eps", eps, "ambiguity radius");
  dro->add_option("--norm", norm_s, "l1, l2, or linf");
  dro->add_option("--w", nv_w, "newsvendor order cost");
  dro->add_option("--b", nv_b, "newsvendor backorder cost");
  dro->add_option("--h", nv_h, "newsvendor holding cost");

  // tune-radius
  auto* tune = app.add_subcommand("tune-radius", "Pick the ambiguity radius for the linear "
                                                 "problem over [0,1]^d by bias-corrected "
                                                 "cross validation");
  std::string tune_file, tune_method = "none";
  std::size_t folds = 5;
  double grid_max = 6.0;
  std::size_t grid_count = 20;
  tune->add_option("file", tune_file, "headered CSV of scenarios")->required();
  tune->add_option("--alpha", alpha, "risk aversion");
  tune->add_option("--folds", folds, "folds K");
  tune->add_option("--method", tune_method, "none, bs_mle, bs_match, or bs_evt");
  tune->add_option("--grid-max", grid_max, "largest radius on the grid");
  tune->add_option("--grid-count", grid_count, "grid size");
  tune->add_option("--reps", reps, "bootstrap repetitions M");
  tune->add_option("--seed", seed, "root seed");
  tune->add_option("--out", out_path, "output CSV path (default stdout)");

  // insurance
  auto* ins = app.add_subcommand("insurance", "Price coverage for an instance config (JSON with "
                                              "M, alpha0, alphas, gammas as [shape, scale] "
                                              "pairs, r, N, seed)");
  std::string ins_config, ins_method = "none";
  double ins_eps = -1.0;
  std::size_t ins_test = 100000;
  ins->add_option("--config", ins_config, "instance config path")->required();
  ins->add_option("--eps", ins_eps, "fixed radius (skips tuning)");
  ins->add_option("--method", ins_method, "tuning bias method: none, bs_mle, bs_match, bs_evt");
  ins->add_option("--folds", folds, "folds K");
  ins->add_option("--grid-max", grid_max, "largest radius on the grid");
  ins->add_option("--grid-count", grid_count, "grid size");
  ins->add_option("--reps", reps, "bootstrap repetitions M");
  ins->add_option("--test-size", ins_test, "out-of-sample evaluation draws");
  ins->add_option("--out", out_path, "output CSV path (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Write a figure's data files");
  std::string exp_name;
  ExperimentConfig ecfg;
  exp->add_option("name", exp_name,
                  "fig1, example2, example3, insurance_n_sweep, insurance_r_sweep, "
                  "insurance_hetero, or epsilon_curves")
      ->required();
  exp->add_option("--reps", ecfg.reps, "repetitions");
  exp->add_option("--seed", ecfg.seed, "root seed");
  exp->add_option("--scale", ecfg.scale, "instance size multiplier");
  exp->add_option("--out", ecfg.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RiskAversion a{alpha};

  if (est->parsed()) {
    ScenarioSet s;
    s.losses = read_loss_file(est_file);
    EstimatorConfig cfg;
    cfg.bootstrap_reps = reps;
    cfg.em_components = est_components;
    cfg.risk_match = risk_match_default(s.size());
    cfg.risk_match.max_iter = est_match_iters;
    cfg.risk_match.components = est_components;
    cfg.seed = seed;
    std::cout << "estimator,value\n";
    for (EstimatorKind kind :
         {EstimatorKind::SAA, EstimatorKind::LOOCV, EstimatorKind::OIC, EstimatorKind::MLE,
          EstimatorKind::MOM, EstimatorKind::BS, EstimatorKind::BS_MLE, EstimatorKind::BS_MATCH,
          EstimatorKind::BS_EVT})
      std::cout << estimator_name(kind) << ',' << fmt(estimate(kind, s, a, cfg)) << "\n";
    return 0;
  }

  if (fit->parsed()) {
    ScenarioSet s;
    s.losses = read_loss_file(fit_file);
    if (fit_method == "em") {
      print_gmm(gmm_fit_em(s, fit_components, fit_iters, 1e-8, seed));
    } else if (fit_method == "match") {
      RiskMatchConfig cfg = risk_match_default(s.size());
      cfg.max_iter = fit_iters;
      cfg.components = fit_components;
      print_gmm(fit_gmm_risk_match(s, a, cfg, seed));
    } else if (fit_method == "evt") {
      bool degenerate = false;
      Gmm q = fit_gmm_evt(s, &degenerate);
      print_gmm(q);
      if (degenerate) std::cerr << "warning: degenerate block maxima, std floored at 1e-3\n";
    } else {
      throw UsageError("unknown fit method: " + fit_method);
    }
    return 0;
  }

  if (dro->parsed()) {
    AmbiguityBall ball{eps, parse_norm(norm_s)};
    if (dro_problem == "linear") {
      Matrix scen = read_csv_matrix(dro_file);
      std::vector<std::pair<double, double>> box(scen[0].size(), {0.0, 1.0});
      SolveResult r = dro_solve_linear(scen, a, ball, box);
      std::cout << "value," << fmt(r.value) << "\n";
      for (std::size_t j = 0; j < r.z.size(); ++j)
        std::cout << "z" << j + 1 << ',' << fmt(r.z[j]) << "\n";
    } else if (dro_problem == "newsvendor") {
      ScenarioSet s;
      s.losses = read_loss_file(dro_file);
      ScalarSolveResult r = dro_solve_newsvendor({nv_w, nv_b, nv_h}, s, a, eps);
      std::cout << "value," << fmt(r.value) << "\nz," << fmt(r.z) << "\n";
    } else if (dro_problem == "regression") {
      Matrix rows = read_csv_matrix(dro_file);
      if (rows[0].size() < 2) throw UsageError("regression needs features plus a label column");
      RegressionData data;
      for (const auto& row : rows) {
        data.features.emplace_back(row.begin(), row.end() - 1);
        data.labels.push_back(row.back());
      }
      SolveResult r = dro_solve_regression(data, a, eps, ball.norm);
      std::cout << "value," << fmt(r.value) << "\n";
      for (std::size_t j = 0; j < r.z.size(); ++j)
        std::cout << "z" << j + 1 << ',' << fmt(r.z[j]) << "\n";
    } else {
      throw UsageError("unknown dro problem: " + dro_problem);
    }
    return 0;
  }

  if (tune->parsed()) {
    Matrix data = read_csv_matrix(tune_file);
    CvConfig cfg;
    cfg.folds = folds;
    for (std::size_t i = 0; i < grid_count; ++i)
      cfg.radius_grid.push_back(grid_count == 1 ? grid_max
                                                : grid_max * static_cast<double>(i) /
                                                      static_cast<double>(grid_count - 1));
    cfg.bootstrap_reps = reps;
    cfg.method = parse_method(tune_method);
    cfg.seed = seed;
    SolverCallback solver = [&](const Matrix& train, double e) {
      std::vector<std::pair<double, double>> box(train[0].size(), {0.0, 1.0});
      SolveResult r = dro_solve_linear(train, a, {e, Norm::L2}, box, 500);
      std::vector<double> z = r.z;
      return [z](const std::vector<double>& row) {
        double v = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) v += z[j] * row[j];
        return v;
      };
    };
    CvResult r = tune_radius(data, cfg, solver, a);
    write_output(out_path, cv_result_csv(r) + "epsilon_star," + fmt(r.epsilon_star) + "\n");
    return 0;
  }

  if (ins->parsed()) {
    std::ifstream f(ins_config);
    if (!f) throw IoError("cannot open config: " + ins_config);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const std::exception& e) {
      throw UsageError(std::string("malformed config: ") + e.what());
    }
    InsuranceInstance inst;
    std::size_t n;
    std::uint64_t iseed;
    try {
      inst.households = j.at("M").get<std::size_t>();
      inst.alpha0 = j.at("alpha0").get<double>();
      inst.alphas = j.at("alphas").get<std::vector<double>>();
      for (const auto& g : j.at("gammas"))
        inst.marginals.push_back({g.at(0).get<double>(), g.at(1).get<double>()});
      inst.r = j.at("r").get<double>();
      n = j.at("N").get<std::size_t>();
      iseed = j.at("seed").get<std::uint64_t>();
    } catch (const std::exception& e) {
      throw UsageError(std::string("config missing field: ") + e.what());
    }
    inst.validate();

    MarketData data = generate_market(inst, n, child_seed(iseed, 0));
    Matrix test = generate_market(inst, ins_test, child_seed(iseed, 1)).joint;

    std::ostringstream os;
    os << "seed,epsilon,method";
    for (std::size_t h = 1; h <= inst.households; ++h) os << ",z_" << h;
    for (std::size_t h = 1; h <= inst.households; ++h) os << ",pi_" << h;
    os << ",in_sample,out_of_sample\n";

    auto emit = [&](const std::string& method, double e, const Policy& p) {
      os << iseed << ',' << fmt(e) << ',' << method;
      for (double z : p.coverage) os << ',' << fmt(z);
      for (double pi : p.premium) os << ',' << fmt(pi);
      os << ',' << fmt(insurer_objective(p.coverage, data, inst, 0.0, Norm::L2)) << ','
         << fmt(out_of_sample_risk(p, test, inst.alpha0)) << "\n";
    };

    if (ins_eps >= 0.0) {
      Policy p = solve_pricing(data, inst, ins_eps, Norm::L2);
      emit("fixed", ins_eps, p);
    } else {
      std::vector<double> grid;
      for (std::size_t i = 0; i < grid_count; ++i)
        grid.push_back(grid_count == 1 ? grid_max
                                       : grid_max * static_cast<double>(i) /
                                             static_cast<double>(grid_count - 1));
      auto runs = run_insurance_methods(inst, data, test, grid, folds,
                                        {parse_method(ins_method)}, child_seed(iseed, 2), reps,
                                        600, 200);
      emit(bias_method_name(runs[0].method), runs[0].epsilon_star, runs[0].policy);
    }
    write_output(out_path, os.str());
    return 0;
  }

  if (exp->parsed()) {
    ecfg.name = experiment_from_string(exp_name);
    entrisk::run(ecfg);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
