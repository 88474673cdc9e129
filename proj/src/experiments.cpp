#include "entrisk/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "entrisk/distributions.hpp"
#include "entrisk/estimators.hpp"
#include "entrisk/risk.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace entrisk {

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

ExperimentName experiment_from_string(const std::string& name) {
  if (name == "fig1") return ExperimentName::fig1;
  if (name == "example2") return ExperimentName::example2;
  if (name == "example3") return ExperimentName::example3;
  if (name == "insurance_n_sweep") return ExperimentName::insurance_n_sweep;
  if (name == "insurance_r_sweep") return ExperimentName::insurance_r_sweep;
  if (name == "insurance_hetero") return ExperimentName::insurance_hetero;
  if (name == "epsilon_curves") return ExperimentName::epsilon_curves;
  throw std::invalid_argument("unknown experiment: " + name);
}

const char* experiment_to_string(ExperimentName name) {
  switch (name) {
    case ExperimentName::fig1: return "fig1";
    case ExperimentName::example2: return "example2";
    case ExperimentName::example3: return "example3";
    case ExperimentName::insurance_n_sweep: return "insurance_n_sweep";
    case ExperimentName::insurance_r_sweep: return "insurance_r_sweep";
    case ExperimentName::insurance_hetero: return "insurance_hetero";
    case ExperimentName::epsilon_curves: return "epsilon_curves";
  }
  return "unknown";
}

namespace {

Gmm example2_gmm() {
  Gmm q;
  q.weights = {0.7, 0.3};
  q.means = {0.5, 1.0};
  q.stds = {2.0, 1.0};
  return q;
}

Gmm example3_gmm() {
  Gmm q;
  q.weights = {0.16, 0.28, 0.23, 0.20, 0.13};
  q.means = {-19.5, -19.0, -18.5, -18.0, -17.5};
  q.stds = {4.0 / 25.0, 1.0 / 4.0, 4.0 / 9.0, 1.0, 4.0};
  return q;
}

Gmm scaled_gmm(const Gmm& q, double c) {
  Gmm out = q;
  for (double& m : out.means) m *= c;
  for (double& s : out.stds) s *= c;
  return out;
}

std::size_t scaled(double base, double scale, std::size_t floor_at) {
  auto v = static_cast<std::size_t>(std::llround(base * scale));
  return std::max(v, floor_at);
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream f(p);
  if (!f) throw std::ios_base::failure("cannot open for writing: " + p.string());
  f << content;
  f.flush();
  if (!f) throw std::ios_base::failure("write failed: " + p.string());
}

std::string summary_stats(std::vector<double> vals) {
  std::string out = fmt(quantile_nearest_rank(vals, 0.25)) + ',' +
                    fmt(quantile_nearest_rank(vals, 0.5)) + ',' +
                    fmt(quantile_nearest_rank(vals, 0.75)) + ',' + fmt(mean(vals));
  return out;
}

std::vector<double> radius_grid_20() {
  std::vector<double> grid(20);
  for (int i = 0; i < 20; ++i) grid[i] = 6.0 * static_cast<double>(i) / 19.0;
  return grid;
}

const std::vector<EstimatorKind> kAllEstimators = {
    EstimatorKind::SAA,    EstimatorKind::LOOCV,    EstimatorKind::OIC,
    EstimatorKind::MLE,    EstimatorKind::MOM,      EstimatorKind::BS,
    EstimatorKind::BS_MLE, EstimatorKind::BS_MATCH, EstimatorKind::BS_EVT};

json base_manifest(const ExperimentConfig& cfg) {
  json m;
  m["experiment"] = experiment_to_string(cfg.name);
  m["repetitions"] = cfg.reps;
  m["seed"] = cfg.seed;
  m["scale"] = cfg.scale;
  m["output_directory"] = cfg.out_dir;
  m["library_version"] = kLibraryVersion;
  return m;
}

void finish_manifest(json& m, const fs::path& dir,
                     std::chrono::steady_clock::time_point start) {
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  m["wall_time_seconds"] = elapsed.count();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

// ---- fig1: empirical risk of Gamma losses across risk aversions ----

void run_fig1(const ExperimentConfig& cfg, const fs::path& dir, json& manifest) {
  const GammaSpec g{10.0, 0.24};
  const std::vector<double> alphas = {0.0, 0.5, 1.0, 1.5, 2.0};
  const std::size_t N = scaled(500, cfg.scale, 10);

  std::vector<std::string> rows(cfg.reps);
  std::vector<std::vector<double>> per_alpha(alphas.size());
  for (auto& v : per_alpha) v.resize(cfg.reps);
  parallel_for_indexed(cfg.reps, [&](std::size_t rep) {
    ScenarioSet s = gamma_sample(g, N, child_seed(cfg.seed, rep));
    std::string r;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      RiskAversion a{alphas[ai]};
      double est = empirical_risk(s, a);
      per_alpha[ai][rep] = est;
      r += fmt(alphas[ai]) + ',' + std::to_string(rep) + ',' + fmt(est) + ',' +
           fmt(gamma_risk(g, a)) + "\n";
    }
    rows[rep] = r;
  });

  std::string raw = "alpha,rep,estimate,true_risk\n";
  for (const auto& r : rows) raw += r;
  write_text(dir / "fig1_raw.csv", raw);

  std::string summary = "alpha,q25,median,q75,mean,true_risk\n";
  for (std::size_t ai = 0; ai < alphas.size(); ++ai)
    summary += fmt(alphas[ai]) + ',' + summary_stats(per_alpha[ai]) + ',' +
               fmt(gamma_risk(g, RiskAversion{alphas[ai]})) + "\n";
  write_text(dir / "fig1_summary.csv", summary);

  manifest["sample_size"] = N;
  manifest["files"] = {"fig1_raw.csv", "fig1_summary.csv"};
}

// ---- example2 / example3: estimator comparison on mixture data ----

void run_estimator_grid(const ExperimentConfig& cfg, const fs::path& dir, json& manifest,
                        const Gmm& truth_model, double alpha,
                        const std::vector<double>& project_scales, std::size_t N,
                        std::size_t bootstrap_reps, std::size_t match_iters,
                        std::size_t components, const std::string& stem) {
  RiskAversion a{alpha};
  std::vector<double> true_risks;
  for (double c : project_scales)
    true_risks.push_back(gmm_risk(scaled_gmm(truth_model, c), a));

  struct Cell {
    std::vector<double> vals;  // per rep
  };
  std::map<std::pair<std::size_t, std::size_t>, Cell> cells;  // (project, estimator)
  for (std::size_t p = 0; p < project_scales.size(); ++p)
    for (std::size_t e = 0; e < kAllEstimators.size(); ++e)
      cells[{p, e}].vals.resize(cfg.reps);

  std::vector<std::string> rows(cfg.reps);
  parallel_for_indexed(cfg.reps, [&](std::size_t rep) {
    ScenarioSet base = gmm_sample(truth_model, N, child_seed(cfg.seed, rep));
    std::string r;
    for (std::size_t p = 0; p < project_scales.size(); ++p) {
      ScenarioSet s;
      s.losses.resize(N);
      for (std::size_t i = 0; i < N; ++i) s.losses[i] = project_scales[p] * base.losses[i];
      EstimatorConfig ecfg;
      ecfg.bootstrap_reps = bootstrap_reps;
      ecfg.em_components = components;
      ecfg.risk_match = risk_match_default(N);
      ecfg.risk_match.max_iter = match_iters;
      ecfg.risk_match.components = components;
      ecfg.seed = child_seed(cfg.seed, 1000 + rep * 16 + p);
      for (std::size_t e = 0; e < kAllEstimators.size(); ++e) {
        double est = estimate(kAllEstimators[e], s, a, ecfg);
        cells.at({p, e}).vals[rep] = est;
        r += std::to_string(rep) + ',' + std::to_string(p) + ',' +
             estimator_name(kAllEstimators[e]) + ',' + fmt(est) + ',' + fmt(true_risks[p]) +
             "\n";
      }
    }
    rows[rep] = r;
  });

  std::string raw = "rep,project,estimator,estimate,true_risk\n";
  for (const auto& r : rows) raw += r;
  write_text(dir / (stem + "_raw.csv"), raw);

  std::string summary = "project,estimator,q25,median,q75,mean,true_risk\n";
  for (std::size_t p = 0; p < project_scales.size(); ++p)
    for (std::size_t e = 0; e < kAllEstimators.size(); ++e)
      summary += std::to_string(p) + ',' + estimator_name(kAllEstimators[e]) + ',' +
                 summary_stats(cells[{p, e}].vals) + ',' + fmt(true_risks[p]) + "\n";
  write_text(dir / (stem + "_summary.csv"), summary);

  manifest["sample_size"] = N;
  manifest["bootstrap_reps"] = bootstrap_reps;
  manifest["alpha"] = alpha;
  manifest["true_risks"] = true_risks;
  manifest["files"] = {stem + "_raw.csv", stem + "_summary.csv"};
}

// ---- insurance sweeps ----

InsuranceInstance common_instance(double r) {
  InsuranceInstance inst;
  inst.households = 5;
  inst.alpha0 = 2.0;
  inst.alphas = {2.9, 2.7, 2.5, 2.3, 2.1};
  inst.marginals.assign(5, GammaSpec{10.0, 0.45});
  inst.r = r;
  return inst;
}

InsuranceInstance hetero_instance() {
  InsuranceInstance inst = common_instance(0.5);
  inst.marginals = {GammaSpec{8.0, 0.41}, GammaSpec{8.5, 0.42}, GammaSpec{9.0, 0.43},
                    GammaSpec{9.5, 0.44}, GammaSpec{10.0, 0.45}};
  return inst;
}

const std::vector<BiasMethod> kSweepMethods = {BiasMethod::NONE, BiasMethod::BS_MATCH,
                                               BiasMethod::BS_EVT};

struct SweepPoint {
  std::string label;
  InsuranceInstance inst;
  std::size_t n = 0;
};

void run_insurance_sweep(const ExperimentConfig& cfg, const fs::path& dir, json& manifest,
                         const std::vector<SweepPoint>& points, const std::string& stem) {
  const std::vector<double> grid = radius_grid_20();
  const std::size_t K = 5;
  const std::size_t test_n = scaled(100000, cfg.scale, 1000);
  const std::size_t M = scaled(200, cfg.scale, 20);

  std::string raw =
      "sweep,rep,method,epsilon_star,rho_corrected,in_sample,out_of_sample,"
      "z1,z2,z3,z4,z5,pi1,pi2,pi3,pi4,pi5\n";
  std::string summary =
      "sweep,method,mean_out_of_sample,median_epsilon_star,"
      "mean_premium_per_expected_coverage,excluded_households\n";

  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const SweepPoint& pt = points[pi];
    std::vector<std::string> rep_rows(cfg.reps);
    std::map<BiasMethod, std::vector<double>> oos, eps_star, ppec;
    std::map<BiasMethod, std::size_t> excluded;
    std::vector<std::vector<InsuranceRun>> all_runs(cfg.reps);

    parallel_for_indexed(cfg.reps, [&](std::size_t rep) {
      std::uint64_t s0 = child_seed(cfg.seed, pi * 1000 + rep);
      MarketData data = generate_market(pt.inst, pt.n, child_seed(s0, 0));
      Matrix test = generate_market(pt.inst, test_n, child_seed(s0, 1)).joint;
      all_runs[rep] = run_insurance_methods(pt.inst, data, test, grid, K, kSweepMethods,
                                            child_seed(s0, 2), M, 600, 200);
      std::string r;
      for (const auto& run : all_runs[rep]) {
        r += pt.label + ',' + std::to_string(rep) + ',' + bias_method_name(run.method) + ',' +
             fmt(run.epsilon_star) + ',' + fmt(run.rho_corrected) + ',' + fmt(run.in_sample) +
             ',' + fmt(run.out_of_sample);
        for (double z : run.policy.coverage) r += ',' + fmt(z);
        for (double p : run.policy.premium) r += ',' + fmt(p);
        r += "\n";
      }
      rep_rows[rep] = r;
    });
    for (const auto& r : rep_rows) raw += r;

    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      for (const auto& run : all_runs[rep]) {
        oos[run.method].push_back(run.out_of_sample);
        eps_star[run.method].push_back(run.epsilon_star);
        for (std::size_t h = 0; h < pt.inst.households; ++h) {
          double zh = run.policy.coverage[h];
          if (zh < 1e-6) {
            ++excluded[run.method];  // premium per unit of coverage undefined at z=0
            continue;
          }
          double exp_loss = pt.inst.marginals[h].kappa * pt.inst.marginals[h].lambda;
          ppec[run.method].push_back(run.policy.premium[h] / (zh * exp_loss));
        }
      }
    }
    for (BiasMethod m : kSweepMethods) {
      double pp = ppec[m].empty() ? 0.0 : mean(ppec[m]);
      summary += pt.label + ',' + bias_method_name(m) + ',' + fmt(mean(oos[m])) + ',' +
                 fmt(median(eps_star[m])) + ',' + fmt(pp) + ',' +
                 std::to_string(excluded[m]) + "\n";
    }
  }

  write_text(dir / (stem + "_raw.csv"), raw);
  write_text(dir / (stem + "_summary.csv"), summary);
  manifest["test_size"] = test_n;
  manifest["folds"] = K;
  manifest["radius_grid"] = grid;
  manifest["files"] = {stem + "_raw.csv", stem + "_summary.csv"};
}

void run_epsilon_curves(const ExperimentConfig& cfg, const fs::path& dir, json& manifest) {
  const std::vector<double> grid = radius_grid_20();
  const std::size_t K = 5;
  const std::size_t N = scaled(1000, cfg.scale, 50);
  const std::size_t test_n = scaled(100000, cfg.scale, 1000);
  const std::size_t M = scaled(200, cfg.scale, 20);
  InsuranceInstance inst = common_instance(0.5);
  RiskAversion a0{inst.alpha0};

  std::vector<std::string> rep_rows(cfg.reps);
  parallel_for_indexed(cfg.reps, [&](std::size_t rep) {
    std::uint64_t s0 = child_seed(cfg.seed, rep);
    MarketData data = generate_market(inst, N, child_seed(s0, 0));
    Matrix test = generate_market(inst, test_n, child_seed(s0, 1)).joint;

    SolverCallback solver = [&](const Matrix& train, double eps) {
      MarketData md;
      md.joint = train;
      Policy p = solve_pricing(md, inst, eps, Norm::L2, 200, 6, 1e-6);
      double tp = 0.0;
      for (double x : p.premium) tp += x;
      std::vector<double> z = p.coverage;
      return [z, tp](const std::vector<double>& row) {
        double v = 0.0;
        for (std::size_t h = 0; h < z.size(); ++h) v += z[h] * row[h];
        return v - tp;
      };
    };

    std::string r;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      double eps = grid[gi];
      KfoldOutput kf = kfold_cv(data.joint, K, eps, solver, a0, false, child_seed(s0, 10 + gi));
      Policy full = solve_pricing(data, inst, eps, Norm::L2, 2000, 10, 1e-8);
      double oos = out_of_sample_risk(full, test, inst.alpha0);
      std::uint64_t bs = child_seed(s0, 100 + gi);
      for (BiasMethod m : kSweepMethods) {
        double delta = 0.0;
        if (m == BiasMethod::BS_MATCH) {
          RiskMatchConfig rm = risk_match_default(kf.pooled.size());
          rm.max_iter = 600;
          Gmm q = fit_gmm_risk_match(kf.pooled, a0, rm, child_seed(bs, 1));
          delta = bias_correct(kf.pooled, a0, q, M, child_seed(bs, 2)).delta_hat;
        } else if (m == BiasMethod::BS_EVT) {
          Gmm q = fit_gmm_evt(kf.pooled);
          delta = bias_correct(kf.pooled, a0, q, M, child_seed(bs, 3)).delta_hat;
        }
        r += std::to_string(rep) + ',' + fmt(eps) + ',' + bias_method_name(m) + ',' +
             fmt(kf.rho_folds) + ',' + fmt(delta) + ',' + fmt(kf.rho_folds + delta) + ',' +
             fmt(oos) + "\n";
      }
    }
    rep_rows[rep] = r;
  });

  std::string raw = "rep,epsilon,method,rho_raw,delta,rho_corrected,out_of_sample\n";
  for (const auto& r : rep_rows) raw += r;
  write_text(dir / "epsilon_curves_raw.csv", raw);
  manifest["sample_size"] = N;
  manifest["test_size"] = test_n;
  manifest["files"] = {"epsilon_curves_raw.csv"};
}

}  // namespace

std::vector<InsuranceRun> run_insurance_methods(
    const InsuranceInstance& inst, const MarketData& data, const Matrix& test,
    const std::vector<double>& grid, std::size_t folds, const std::vector<BiasMethod>& methods,
    std::uint64_t seed, std::size_t bootstrap_reps, std::size_t risk_match_iters,
    std::size_t cv_solve_iters) {
  inst.validate();
  if (grid.empty()) throw std::invalid_argument("run_insurance_methods: empty grid");
  RiskAversion a0{inst.alpha0};

  SolverCallback solver = [&](const Matrix& train, double eps) {
    MarketData md;
    md.joint = train;
    Policy p = solve_pricing(md, inst, eps, Norm::L2, cv_solve_iters, 6, 1e-6);
    double tp = 0.0;
    for (double x : p.premium) tp += x;
    std::vector<double> z = p.coverage;
    return [z, tp](const std::vector<double>& row) {
      double v = 0.0;
      for (std::size_t h = 0; h < z.size(); ++h) v += z[h] * row[h];
      return v - tp;
    };
  };

  // cross-validate once per radius; methods reuse the folds and add
  // their own bias term
  std::vector<KfoldOutput> kf(grid.size());
  std::map<BiasMethod, std::vector<double>> corrected;
  for (BiasMethod m : methods) corrected[m].resize(grid.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    kf[gi] = kfold_cv(data.joint, folds, grid[gi], solver, a0, false, child_seed(seed, gi));
    std::uint64_t bs = child_seed(seed, 1000 + gi);
    for (BiasMethod m : methods) {
      double delta = 0.0;
      switch (m) {
        case BiasMethod::NONE:
          break;
        case BiasMethod::BS_MLE: {
          Gmm q = gmm_fit_em(kf[gi].pooled, 2, 500, 1e-8, child_seed(bs, 0));
          delta = bias_correct(kf[gi].pooled, a0, q, bootstrap_reps, child_seed(bs, 1)).delta_hat;
          break;
        }
        case BiasMethod::BS_MATCH: {
          RiskMatchConfig rm = risk_match_default(kf[gi].pooled.size());
          rm.max_iter = risk_match_iters;
          Gmm q = fit_gmm_risk_match(kf[gi].pooled, a0, rm, child_seed(bs, 2));
          delta = bias_correct(kf[gi].pooled, a0, q, bootstrap_reps, child_seed(bs, 3)).delta_hat;
          break;
        }
        case BiasMethod::BS_EVT: {
          Gmm q = fit_gmm_evt(kf[gi].pooled);
          delta = bias_correct(kf[gi].pooled, a0, q, bootstrap_reps, child_seed(bs, 4)).delta_hat;
          break;
        }
      }
      corrected[m][gi] = kf[gi].rho_folds + delta;
    }
  }

  std::map<std::size_t, Policy> final_cache;
  std::vector<InsuranceRun> out;
  for (BiasMethod m : methods) {
    std::size_t best = 0;
    for (std::size_t gi = 1; gi < grid.size(); ++gi)
      if (corrected[m][gi] <= corrected[m][best]) best = gi;
    if (!final_cache.count(best))
      final_cache[best] = solve_pricing(data, inst, grid[best], Norm::L2, 2000, 10, 1e-8);
    InsuranceRun run;
    run.method = m;
    run.epsilon_star = grid[best];
    run.rho_corrected = corrected[m][best];
    run.policy = final_cache[best];
    run.in_sample = insurer_objective(run.policy.coverage, data, inst, 0.0, Norm::L2);
    run.out_of_sample = out_of_sample_risk(run.policy, test, inst.alpha0);
    out.push_back(std::move(run));
  }
  return out;
}

void run(const ExperimentConfig& cfg) {
  if (cfg.reps < 1) throw std::invalid_argument("run: repetitions must be >= 1");
  auto start = std::chrono::steady_clock::now();
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create output directory: " + cfg.out_dir);

  json manifest = base_manifest(cfg);
  switch (cfg.name) {
    case ExperimentName::fig1:
      run_fig1(cfg, dir, manifest);
      break;
    case ExperimentName::example2:
      run_estimator_grid(cfg, dir, manifest, example2_gmm(), 1.0, {1.0},
                         scaled(1000, cfg.scale, 100), scaled(500, cfg.scale, 10),
                         3000, 2, "example2");
      break;
    case ExperimentName::example3:
      run_estimator_grid(cfg, dir, manifest, example3_gmm(), 3.0, {0.4, 0.6, 0.8},
                         scaled(1000, cfg.scale, 200), scaled(200, cfg.scale, 10),
                         800, 5, "example3");
      break;
    case ExperimentName::insurance_n_sweep: {
      std::vector<SweepPoint> pts;
      for (std::size_t n : {std::size_t{250}, std::size_t{500}, std::size_t{1000}})
        pts.push_back({std::to_string(n), common_instance(0.5), scaled(double(n), cfg.scale, 50)});
      run_insurance_sweep(cfg, dir, manifest, pts, "insurance_n_sweep");
      break;
    }
    case ExperimentName::insurance_r_sweep: {
      std::vector<SweepPoint> pts;
      for (double r : {0.0, 0.25, 0.5, 0.75, 1.0})
        pts.push_back({fmt(r), common_instance(r), scaled(1000, cfg.scale, 50)});
      run_insurance_sweep(cfg, dir, manifest, pts, "insurance_r_sweep");
      break;
    }
    case ExperimentName::insurance_hetero: {
      std::vector<SweepPoint> pts = {{"hetero", hetero_instance(), scaled(1000, cfg.scale, 50)}};
      run_insurance_sweep(cfg, dir, manifest, pts, "insurance_hetero");
      break;
    }
    case ExperimentName::epsilon_curves:
      run_epsilon_curves(cfg, dir, manifest);
      break;
  }
  finish_manifest(manifest, dir, start);
}

}  // namespace entrisk
