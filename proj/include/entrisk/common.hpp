#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace entrisk {

using Matrix = std::vector<std::vector<double>>;

// log(sum_i exp(v_i)), shifted by the max element.
inline double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_mean_exp(const std::vector<double>& v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

// Median with the mean-of-middle-two convention for even counts.
// Takes a copy on purpose; input order is not disturbed.
inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Nearest-rank empirical quantile: smallest order statistic with
// rank >= ceil(p * n).
inline double quantile_nearest_rank(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must lie in (0,1]");
  std::sort(v.begin(), v.end());
  size_t rank = static_cast<size_t>(std::ceil(p * static_cast<double>(v.size())));
  if (rank < 1) rank = 1;
  return v[rank - 1];
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Splitmix64-style seed derivation; parallel tasks get independent
// streams from (root, index) and results stay identical to a
// sequential run.
inline std::uint64_t child_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, n) on up to ENTRISK_THREADS workers and
// returns results in index order. Thread count 1 and k produce the
// same output by construction.
void parallel_for_indexed(std::size_t n, const std::function<void(std::size_t)>& fn);

// Resolved worker count: ENTRISK_THREADS if set, else hardware concurrency.
unsigned thread_count();

}  // namespace entrisk
