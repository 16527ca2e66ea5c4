#include "fastpd/explain.hpp"

#include <algorithm>
#include <cmath>

#include "fastpd/baseline.hpp"
#include "fastpd/errors.hpp"
#include "fastpd/threads.hpp"

namespace fastpd {

const std::vector<double>* Decomposition::find(const FeatureSubset& s) const {
  for (const auto& [subset, values] : components)
    if (subset == s) return &values;
  return nullptr;
}

std::vector<double> Decomposition::reconstruction() const {
  const std::size_t n = eval_points ? eval_points->n()
                                    : (components.empty() ? 0 : components.front().second.size());
  std::vector<double> out(n, intercept);
  for (const auto& [subset, values] : components)
    for (std::size_t r = 0; r < n; ++r) out[r] += values[r];
  return out;
}

Decomposition decompose(const EnsembleAugmentation& aug,
                        std::shared_ptr<const Dataset> eval_points,
                        const DecomposeOptions& options) {
  if (!eval_points || eval_points->n() == 0)
    throw ValidationError("decompose: empty evaluation batch");
  if (eval_points->d() != aug.data_dim)
    throw ValidationError("decompose: evaluation points have " +
                          std::to_string(eval_points->d()) + " columns, background had " +
                          std::to_string(aug.data_dim));
  eval_points->check_finite();
  const std::size_t n = eval_points->n();
  const int n_trees = static_cast<int>(aug.trees.size());

  // Per tree: PD columns for the full local lattice, then the in-place
  // alternating-sign inversion along the mask dimension.
  std::vector<std::vector<std::vector<double>>> per_tree(static_cast<std::size_t>(n_trees));
  parallel_for(n_trees, options.threads, [&](int t) {
    const Tree& tree = aug.model->trees[static_cast<std::size_t>(t)];
    const AugmentedTree& at = aug.trees[static_cast<std::size_t>(t)];
    auto cols = tree_pd_all_subsets(tree, at, *eval_points);
    const int f = at.num_local_features();
    for (int b = 0; b < f; ++b) {
      const std::uint64_t bit = std::uint64_t{1} << b;
      for (std::uint64_t mask = 0; mask < cols.size(); ++mask) {
        if (!(mask & bit)) continue;
        const std::vector<double>& lower = cols[mask ^ bit];
        std::vector<double>& upper = cols[mask];
        for (std::size_t r = 0; r < n; ++r) upper[r] -= lower[r];
      }
    }
    per_tree[static_cast<std::size_t>(t)] = std::move(cols);
  });

  // Cross-tree aggregation keyed by global subset, trees in fixed order.
  Decomposition out;
  out.eval_points = std::move(eval_points);
  out.intercept = aug.model->intercept;
  std::map<FeatureSubset, std::vector<double>> merged;
  for (int t = 0; t < n_trees; ++t) {
    const AugmentedTree& at = aug.trees[static_cast<std::size_t>(t)];
    auto& cols = per_tree[static_cast<std::size_t>(t)];
    // The empty-set component is constant across rows by construction.
    out.intercept += cols[0][0];
    for (std::uint64_t mask = 1; mask < cols.size(); ++mask) {
      auto [it, inserted] = merged.try_emplace(at.to_global(mask));
      if (inserted) {
        it->second = std::move(cols[mask]);
      } else {
        std::vector<double>& acc = it->second;
        const std::vector<double>& add = cols[mask];
        for (std::size_t r = 0; r < n; ++r) acc[r] += add[r];
      }
    }
    cols.clear();
    cols.shrink_to_fit();
  }

  out.components.reserve(merged.size());
  for (auto& [subset, values] : merged) {
    if (options.prune_zero_components &&
        std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; }))
      continue;
    out.components.emplace_back(subset, std::move(values));
  }
  std::sort(out.components.begin(), out.components.end(),
            [](const auto& a, const auto& b) { return subset_order_less(a.first, b.first); });
  return out;
}


namespace {

// Shared lattice machinery of the two reference decompositions: dense PD
// columns over the subsets of the split-feature union, inverted in place.
Decomposition decompose_from_lattice(
    std::shared_ptr<const Dataset> eval_points, const std::vector<int>& lattice_features,
    int enumeration_guard,
    const std::function<double(std::span<const double>, const FeatureSubset&)>& pd) {
  if (!eval_points || eval_points->n() == 0)
    throw ValidationError("decompose: empty evaluation batch");
  const int g = static_cast<int>(lattice_features.size());
  if (g > enumeration_guard)
    throw BudgetError("decompose over 2^" + std::to_string(g) +
                      " subsets refused (guard: " + std::to_string(enumeration_guard) + ")");
  const std::size_t n = eval_points->n();
  const std::size_t n_subsets = std::size_t{1} << g;

  std::vector<std::vector<double>> cols(n_subsets, std::vector<double>(n));
  for (std::uint64_t mask = 0; mask < n_subsets; ++mask) {
    const FeatureSubset s = FeatureSubset::from_local_mask(mask, lattice_features);
    for (std::size_t r = 0; r < n; ++r) cols[mask][r] = pd(eval_points->row(r), s);
  }
  for (int b = 0; b < g; ++b) {
    const std::uint64_t bit = std::uint64_t{1} << b;
    for (std::uint64_t mask = 0; mask < n_subsets; ++mask) {
      if (!(mask & bit)) continue;
      for (std::size_t r = 0; r < n; ++r) cols[mask][r] -= cols[mask ^ bit][r];
    }
  }

  Decomposition out;
  out.eval_points = std::move(eval_points);
  out.intercept = cols[0][0];
  for (std::uint64_t mask = 1; mask < n_subsets; ++mask)
    out.components.emplace_back(FeatureSubset::from_local_mask(mask, lattice_features),
                                std::move(cols[mask]));
  std::sort(out.components.begin(), out.components.end(),
            [](const auto& a, const auto& b) { return subset_order_less(a.first, b.first); });
  return out;
}

std::vector<int> split_feature_union(const TreeEnsemble& ensemble) {
  FeatureSubset g;
  for (const Tree& tree : ensemble.trees) g = g | tree.split_features();
  return g.indices();
}

}  // namespace

Decomposition decompose_vanilla(const TreeEnsemble& ensemble, const Dataset& background,
                                std::shared_ptr<const Dataset> eval_points,
                                int enumeration_guard) {
  return decompose_from_lattice(
      std::move(eval_points), split_feature_union(ensemble), enumeration_guard,
      [&](std::span<const double> x, const FeatureSubset& s) {
        return vanilla_pd(ensemble, background, x, s);
      });
}

Decomposition decompose_path(const TreeEnsemble& ensemble, const Dataset& background,
                             std::shared_ptr<const Dataset> eval_points,
                             int enumeration_guard) {
  const CoverageCounts coverage = compute_coverage(ensemble, background);
  return decompose_from_lattice(
      std::move(eval_points), split_feature_union(ensemble), enumeration_guard,
      [&](std::span<const double> x, const FeatureSubset& s) {
        return path_dependent_pd_ensemble(ensemble, coverage, x, s);
      });
}

std::map<FeatureSubset, double> mobius_inverse(const std::map<FeatureSubset, double>& pd_values) {
  std::map<FeatureSubset, double> out;
  for (const auto& [s, unused] : pd_values) {
    double value = 0.0;
    const int s_size = s.count();
    for (const FeatureSubset& u : s.subsets()) {
      const auto it = pd_values.find(u);
      if (it == pd_values.end())
        throw ValidationError("mobius_inverse: incomplete lattice, missing subset of a key");
      const int diff = s_size - u.count();
      value += (diff % 2 == 0 ? 1.0 : -1.0) * it->second;
    }
    out.emplace(s, value);
  }
  return out;
}

std::map<FeatureSubset, double> zeta_transform(const std::map<FeatureSubset, double>& components) {
  std::map<FeatureSubset, double> out;
  for (const auto& [s, unused] : components) {
    double value = 0.0;
    for (const FeatureSubset& u : s.subsets()) {
      const auto it = components.find(u);
      if (it == components.end())
        throw ValidationError("zeta_transform: incomplete lattice, missing subset of a key");
      value += it->second;
    }
    out.emplace(s, value);
  }
  return out;
}

ShapMatrix shap_from_decomposition(const Decomposition& decomposition) {
  if (!decomposition.eval_points)
    throw ValidationError("shap_from_decomposition: decomposition has no evaluation points");
  ShapMatrix shap;
  shap.n = decomposition.eval_points->n();
  shap.d = decomposition.eval_points->d();
  shap.baseline = decomposition.intercept;
  shap.values.assign(shap.n * shap.d, 0.0);
  for (const auto& [subset, values] : decomposition.components) {
    const double share = 1.0 / subset.count();
    for (int k : subset.indices()) {
      for (std::size_t r = 0; r < shap.n; ++r)
        shap.at(r, static_cast<std::size_t>(k)) += share * values[r];
    }
  }
  return shap;
}

double shapley_weight(int subset_size, int d) {
  // |S|! (d-|S|-1)! / d!
  return std::exp(std::lgamma(subset_size + 1.0) + std::lgamma(d - subset_size + 0.0) -
                  std::lgamma(d + 1.0));
}

namespace {

void check_enumeration(int d, int guard) {
  if (d < 1) throw ValidationError("shap enumeration: d must be >= 1");
  if (d > guard)
    throw BudgetError("shap enumeration over 2^" + std::to_string(d) +
                      " subsets refused (guard: d <= " + std::to_string(guard) + ")");
}

}  // namespace

double shap_direct(const std::function<double(const FeatureSubset&)>& pd, int d, int k,
                   int enumeration_guard) {
  check_enumeration(d, enumeration_guard);
  if (k < 0 || k >= d) throw ValidationError("shap_direct: feature index out of range");
  double phi = 0.0;
  const std::uint64_t full = (std::uint64_t{1} << d) - 1;
  const std::uint64_t kbit = std::uint64_t{1} << k;
  for (std::uint64_t mask = 0; mask <= full; ++mask) {
    if (mask & kbit) continue;
    FeatureSubset s;
    for (int b = 0; b < d; ++b)
      if ((mask >> b) & 1) s.set(b);
    FeatureSubset with_k = s;
    with_k.set(k);
    phi += shapley_weight(s.count(), d) * (pd(with_k) - pd(s));
  }
  return phi;
}

std::vector<double> shap_all_direct(const std::function<double(const FeatureSubset&)>& pd, int d,
                                    int enumeration_guard) {
  check_enumeration(d, enumeration_guard);
  // One PD evaluation per subset, then the marginal-contribution sums.
  const std::size_t n_subsets = std::size_t{1} << d;
  std::vector<double> table(n_subsets);
  for (std::uint64_t mask = 0; mask < n_subsets; ++mask) {
    FeatureSubset s;
    for (int b = 0; b < d; ++b)
      if ((mask >> b) & 1) s.set(b);
    table[mask] = pd(s);
  }
  std::vector<double> phi(static_cast<std::size_t>(d), 0.0);
  for (int k = 0; k < d; ++k) {
    const std::uint64_t kbit = std::uint64_t{1} << k;
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < n_subsets; ++mask) {
      if (mask & kbit) continue;
      acc += shapley_weight(std::popcount(mask), d) * (table[mask | kbit] - table[mask]);
    }
    phi[static_cast<std::size_t>(k)] = acc;
  }
  return phi;
}

std::vector<PdPlotPoint> pd_plot(const Decomposition& decomposition, int feature) {
  if (!decomposition.eval_points)
    throw ValidationError("pd_plot: decomposition has no evaluation points");
  const Dataset& eval = *decomposition.eval_points;
  if (feature < 0 || static_cast<std::size_t>(feature) >= eval.d())
    throw ValidationError("pd_plot: feature index " + std::to_string(feature) +
                          " out of range for d = " + std::to_string(eval.d()));
  // A feature the model never splits on has a zero main effect and no
  // stored component; the plot is flat at the intercept.
  const std::vector<double>* component = decomposition.find(FeatureSubset::single(feature));
  std::vector<PdPlotPoint> out(eval.n());
  for (std::size_t r = 0; r < eval.n(); ++r) {
    out[r].x = eval.at(r, static_cast<std::size_t>(feature));
    out[r].pd = decomposition.intercept + (component ? (*component)[r] : 0.0);
  }
  std::sort(out.begin(), out.end(),
            [](const PdPlotPoint& a, const PdPlotPoint& b) { return a.x < b.x; });
  return out;
}

std::vector<std::pair<FeatureSubset, double>> importance(const Decomposition& decomposition) {
  if (!decomposition.eval_points || decomposition.eval_points->n() == 0)
    throw ValidationError("importance: empty evaluation set");
  std::vector<std::pair<FeatureSubset, double>> out;
  out.reserve(decomposition.components.size());
  for (const auto& [subset, values] : decomposition.components) {
    double acc = 0.0;
    for (double v : values) acc += std::abs(v);
    out.emplace_back(subset, acc / static_cast<double>(values.size()));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

BilinearReference bilinear_reference(double x1, double x2, double exy) {
  BilinearReference ref;
  ref.m0 = 2.0 * exy;
  ref.m1 = x1 - 2.0 * exy;
  ref.m2 = -2.0 * exy;
  ref.m12 = 2.0 * x1 * x2 + 2.0 * exy;
  ref.phi1 = x1 + x1 * x2 - exy;
  return ref;
}

}  // namespace fastpd
