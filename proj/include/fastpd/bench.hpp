#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastpd/model.hpp"

namespace fastpd {

struct BenchResult {
  std::string method;
  std::size_t n = 0;
  double seconds = 0.0;  // median over repeats
  bool ok = true;        // false -> reported as NA
};

// Times an empirical-PD workload with n_b = n_e = n per method and size.
// The workload is the empty set plus the first `workload_singletons`
// singleton subsets (negative: all features). Data are iid Gaussian columns
// drawn from the given seed; per-method timing covers the whole run,
// including the augmentation (fastpd) or coverage pass (path). Per-cell
// failures are captured as ok = false rather than aborting the table.
std::vector<BenchResult> run_bench(const TreeEnsemble& ensemble,
                                   const std::vector<std::size_t>& sizes,
                                   const std::vector<std::string>& methods, int repeats,
                                   std::uint64_t seed, int threads = 1,
                                   double data_sd = 1.0, int workload_singletons = -1);

// Least-squares slope of log(seconds) against log(n); the scaling exponent.
double log_log_slope(const std::vector<std::pair<std::size_t, double>>& timings);

}  // namespace fastpd
