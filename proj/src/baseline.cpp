#include "fastpd/baseline.hpp"

#include <cmath>

#include "fastpd/errors.hpp"
#include "fastpd/explain.hpp"

namespace fastpd {

namespace {

void check_inputs(const TreeEnsemble& ensemble, const Dataset& background,
                  std::span<const double> x, const FeatureSubset& s) {
  if (background.n() == 0) throw ValidationError("empty background sample");
  if (background.d() < static_cast<std::size_t>(ensemble.num_features))
    throw ValidationError("background has " + std::to_string(background.d()) +
                          " columns but the model uses " + std::to_string(ensemble.num_features));
  if (x.size() != background.d())
    throw ValidationError("evaluation point has " + std::to_string(x.size()) +
                          " coordinates, background has " + std::to_string(background.d()));
  if (s.max_feature() >= static_cast<int>(background.d()))
    throw ValidationError("subset references feature index " + std::to_string(s.max_feature()) +
                          " >= d = " + std::to_string(background.d()));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]))
      throw ValidationError("non-finite coordinate at index " + std::to_string(i));
}

}  // namespace

double vanilla_pd(const TreeEnsemble& ensemble, const Dataset& background,
                  std::span<const double> x, const FeatureSubset& s) {
  check_inputs(ensemble, background, x, s);
  const std::vector<int> fixed = s.indices();
  std::vector<double> hybrid(background.d());
  double acc = 0.0;
  // Inputs are validated once above; the hybrid rows stay finite, so the
  // inner loop can take the raw traversal path.
  for (std::size_t i = 0; i < background.n(); ++i) {
    const std::span<const double> row = background.row(i);
    std::copy(row.begin(), row.end(), hybrid.begin());
    for (int k : fixed) hybrid[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
    double prediction = ensemble.intercept;
    for (const Tree& tree : ensemble.trees) prediction += tree.leaf_value_at(hybrid);
    acc += prediction;
  }
  return acc / static_cast<double>(background.n());
}

CoverageCounts compute_coverage(const TreeEnsemble& ensemble, const Dataset& background) {
  if (background.n() == 0) throw ValidationError("empty background sample");
  CoverageCounts coverage(ensemble.trees.size());
  for (std::size_t t = 0; t < ensemble.trees.size(); ++t) {
    const Tree& tree = ensemble.trees[t];
    coverage[t].assign(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < background.n(); ++i) {
      const std::span<const double> row = background.row(i);
      int id = tree.root;
      for (;;) {
        ++coverage[t][static_cast<std::size_t>(id)];
        const Node& n = tree.nodes[static_cast<std::size_t>(id)];
        if (n.is_leaf()) break;
        id = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
      }
    }
  }
  return coverage;
}

namespace {

double path_pd_rec(const Tree& tree, const std::vector<std::uint64_t>& coverage,
                   std::span<const double> x, const FeatureSubset& s, int node_id) {
  const Node& node = tree.nodes[static_cast<std::size_t>(node_id)];
  if (node.is_leaf()) return node.value;
  if (s.test(node.feature)) {
    const int next =
        x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
    return path_pd_rec(tree, coverage, x, s, next);
  }
  const std::uint64_t here = coverage[static_cast<std::size_t>(node_id)];
  if (here == 0) return 0.0;
  const std::uint64_t n_left = coverage[static_cast<std::size_t>(node.left)];
  const std::uint64_t n_right = coverage[static_cast<std::size_t>(node.right)];
  double acc = 0.0;
  if (n_left > 0)
    acc += static_cast<double>(n_left) * path_pd_rec(tree, coverage, x, s, node.left);
  if (n_right > 0)
    acc += static_cast<double>(n_right) * path_pd_rec(tree, coverage, x, s, node.right);
  return acc / static_cast<double>(here);
}

}  // namespace

double path_dependent_pd(const Tree& tree, const std::vector<std::uint64_t>& coverage,
                         std::span<const double> x, const FeatureSubset& s) {
  if (coverage.size() != tree.nodes.size())
    throw ValidationError("path_dependent_pd: coverage size does not match the tree");
  return path_pd_rec(tree, coverage, x, s, tree.root);
}

double path_dependent_pd_ensemble(const TreeEnsemble& ensemble, const CoverageCounts& coverage,
                                  std::span<const double> x, const FeatureSubset& s) {
  if (coverage.size() != ensemble.trees.size())
    throw ValidationError("path_dependent_pd_ensemble: coverage does not match the ensemble");
  double acc = ensemble.intercept;
  for (std::size_t t = 0; t < ensemble.trees.size(); ++t)
    acc += path_dependent_pd(ensemble.trees[t], coverage[t], x, s);
  return acc;
}

ShapValues path_dependent_shap(const TreeEnsemble& ensemble, const Dataset& background,
                               std::span<const double> x, int enumeration_guard) {
  check_inputs(ensemble, background, x, FeatureSubset{});
  const CoverageCounts coverage = compute_coverage(ensemble, background);
  const int d = static_cast<int>(background.d());
  ShapValues out;
  out.baseline = path_dependent_pd_ensemble(ensemble, coverage, x, FeatureSubset{});
  out.phi = shap_all_direct(
      [&](const FeatureSubset& s) {
        return path_dependent_pd_ensemble(ensemble, coverage, x, s);
      },
      d, enumeration_guard);
  return out;
}

ShapValues vanilla_shap(const TreeEnsemble& ensemble, const Dataset& background,
                        std::span<const double> x, int enumeration_guard) {
  check_inputs(ensemble, background, x, FeatureSubset{});
  const int d = static_cast<int>(background.d());
  ShapValues out;
  out.baseline = vanilla_pd(ensemble, background, x, FeatureSubset{});
  out.phi = shap_all_direct(
      [&](const FeatureSubset& s) { return vanilla_pd(ensemble, background, x, s); }, d,
      enumeration_guard);
  return out;
}

}  // namespace fastpd
