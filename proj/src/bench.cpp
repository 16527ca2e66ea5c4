#include "fastpd/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>

#include "fastpd/baseline.hpp"
#include "fastpd/dataset.hpp"
#include "fastpd/errors.hpp"
#include "fastpd/evaluate.hpp"

namespace fastpd {

namespace {

using Clock = std::chrono::steady_clock;

double time_once(const std::function<void()>& fn) {
  const auto start = Clock::now();
  fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Dataset gaussian_data(std::size_t n, std::size_t d, std::uint64_t seed, double sd) {
  GaussianSampler rng(seed);
  Dataset data(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) data.at(i, j) = sd * rng.normal();
  return data;
}

// Consume the results so the compiler cannot drop the work.
volatile double g_sink = 0.0;

void run_fastpd(const TreeEnsemble& ensemble, const Dataset& data,
                const std::vector<FeatureSubset>& subsets, int threads) {
  auto model = std::make_shared<const TreeEnsemble>(ensemble);
  const EnsembleAugmentation aug =
      augment_ensemble(model, data, AugmentOptions{.keep_lists = false}, threads);
  const PdMatrix m = pd_evaluate_ensemble(aug, data, subsets, threads);
  g_sink = m.at(0, 0);
}

void run_vanilla(const TreeEnsemble& ensemble, const Dataset& data,
                 const std::vector<FeatureSubset>& subsets) {
  double acc = 0.0;
  for (const FeatureSubset& s : subsets)
    for (std::size_t i = 0; i < data.n(); ++i) acc += vanilla_pd(ensemble, data, data.row(i), s);
  g_sink = acc;
}

void run_path(const TreeEnsemble& ensemble, const Dataset& data,
              const std::vector<FeatureSubset>& subsets) {
  const CoverageCounts coverage = compute_coverage(ensemble, data);
  double acc = 0.0;
  for (const FeatureSubset& s : subsets)
    for (std::size_t i = 0; i < data.n(); ++i)
      acc += path_dependent_pd_ensemble(ensemble, coverage, data.row(i), s);
  g_sink = acc;
}

}  // namespace

std::vector<BenchResult> run_bench(const TreeEnsemble& ensemble,
                                   const std::vector<std::size_t>& sizes,
                                   const std::vector<std::string>& methods, int repeats,
                                   std::uint64_t seed, int threads, double data_sd,
                                   int workload_singletons) {
  if (repeats < 1) throw ValidationError("run_bench: repeats must be >= 1");
  if (!std::is_sorted(sizes.begin(), sizes.end()))
    throw ValidationError("run_bench: sizes must be ascending");
  const std::size_t d = static_cast<std::size_t>(std::max(ensemble.num_features, 1));
  std::size_t singles = d;
  if (workload_singletons >= 0) singles = std::min(d, static_cast<std::size_t>(workload_singletons));
  std::vector<FeatureSubset> subsets{FeatureSubset{}};
  for (std::size_t k = 0; k < singles; ++k) subsets.push_back(FeatureSubset::single(static_cast<int>(k)));

  std::vector<BenchResult> out;
  for (const std::string& method : methods) {
    for (std::size_t size_idx = 0; size_idx < sizes.size(); ++size_idx) {
      const std::size_t n = sizes[size_idx];
      BenchResult row{method, n, 0.0, true};
      try {
        const Dataset data = gaussian_data(n, d, seed + size_idx, data_sd);
        std::vector<double> times;
        times.reserve(static_cast<std::size_t>(repeats));
        for (int rep = 0; rep < repeats; ++rep) {
          if (method == "fastpd") {
            times.push_back(time_once([&] { run_fastpd(ensemble, data, subsets, threads); }));
          } else if (method == "vanilla") {
            times.push_back(time_once([&] { run_vanilla(ensemble, data, subsets); }));
          } else if (method == "path") {
            times.push_back(time_once([&] { run_path(ensemble, data, subsets); }));
          } else {
            throw ValidationError("run_bench: unknown method '" + method + "'");
          }
        }
        row.seconds = median(std::move(times));
      } catch (const ValidationError&) {
        throw;
      } catch (const Error&) {
        row.ok = false;  // e.g. budget refusal for this cell
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

double log_log_slope(const std::vector<std::pair<std::size_t, double>>& timings) {
  if (timings.size() < 2) throw ValidationError("log_log_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, seconds] : timings) {
    const double lx = std::log(static_cast<double>(n));
    const double ly = std::log(seconds);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double count = static_cast<double>(timings.size());
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace fastpd
