#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrisk/cv.hpp"
#include "entrisk/insurance.hpp"

namespace entrisk {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class ExperimentName {
  fig1,
  example2,
  example3,
  insurance_n_sweep,
  insurance_r_sweep,
  insurance_hetero,
  epsilon_curves,
};

// Throws std::invalid_argument for unknown names.
ExperimentName experiment_from_string(const std::string& name);
const char* experiment_to_string(ExperimentName name);

struct ExperimentConfig {
  ExperimentName name = ExperimentName::fig1;
  std::size_t reps = 20;
  std::uint64_t seed = 0;
  double scale = 1.0;  // shrinks or restores instance sizes
  std::string out_dir = "out";
};

// Writes the experiment's CSV files plus a manifest.json into
// cfg.out_dir. Throws std::ios_base::failure on unwritable output.
void run(const ExperimentConfig& cfg);

// One instance of the pricing problem evaluated under several radius
// selection methods; cross-validation folds are shared so methods
// differ only in the bias term.
struct InsuranceRun {
  BiasMethod method = BiasMethod::NONE;
  double epsilon_star = 0.0;
  double rho_corrected = 0.0;  // corrected CV risk at epsilon_star
  Policy policy;               // trained on the full data at epsilon_star
  double in_sample = 0.0;      // unregularized objective on the training data
  double out_of_sample = 0.0;
};

std::vector<InsuranceRun> run_insurance_methods(
    const InsuranceInstance& inst, const MarketData& data, const Matrix& test,
    const std::vector<double>& grid, std::size_t folds, const std::vector<BiasMethod>& methods,
    std::uint64_t seed, std::size_t bootstrap_reps, std::size_t risk_match_iters,
    std::size_t cv_solve_iters);

// Shortest round-trip decimal text for a double; used by every CSV
// writer so outputs are byte-stable.
std::string fmt(double x);

}  // namespace entrisk
