#include "fastpd/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "fastpd/errors.hpp"
#include "fastpd/threads.hpp"

namespace fastpd {

namespace {

void check_point(std::span<const double> x, std::size_t needed) {
  if (x.size() < needed)
    throw ValidationError("pd_evaluate: point has " + std::to_string(x.size()) +
                          " coordinates, tree needs " + std::to_string(needed));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]))
      throw ValidationError("pd_evaluate: non-finite coordinate at index " + std::to_string(i));
}

double eval_local(const Tree& tree, const AugmentedTree& aug, std::span<const double> x,
                  std::uint64_t u_local, int node_id) {
  const Node& node = tree.nodes[static_cast<std::size_t>(node_id)];
  if (node.is_leaf()) {
    const AugmentedLeaf& leaf =
        aug.leaves[static_cast<std::size_t>(aug.leaf_slot[static_cast<std::size_t>(node_id)])];
    const std::size_t idx = AugmentedTree::pack_index(u_local & leaf.path_mask, leaf.path_mask);
    return node.value * (static_cast<double>(leaf.counts[idx]) / static_cast<double>(aug.n_b));
  }
  const int bit = static_cast<int>(
      std::lower_bound(aug.local_features.begin(), aug.local_features.end(), node.feature) -
      aug.local_features.begin());
  if ((u_local >> bit) & 1) {
    const int next =
        x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
    return eval_local(tree, aug, x, u_local, next);
  }
  return eval_local(tree, aug, x, u_local, node.left) +
         eval_local(tree, aug, x, u_local, node.right);
}

}  // namespace

double pd_evaluate(const Tree& tree, const AugmentedTree& aug, std::span<const double> x,
                   const FeatureSubset& s) {
  const int max_needed = aug.local_features.empty() ? 0 : aug.local_features.back() + 1;
  check_point(x, static_cast<std::size_t>(max_needed));
  return eval_local(tree, aug, x, aug.reduce(s), tree.root);
}

std::map<FeatureSubset, double> all_pd_per_tree(const Tree& tree, const AugmentedTree& aug,
                                                std::span<const double> x) {
  const int max_needed = aug.local_features.empty() ? 0 : aug.local_features.back() + 1;
  check_point(x, static_cast<std::size_t>(max_needed));
  const int f = aug.num_local_features();
  std::map<FeatureSubset, double> out;
  for (std::uint64_t u = 0; u < (std::uint64_t{1} << f); ++u)
    out.emplace(aug.to_global(u), eval_local(tree, aug, x, u, tree.root));
  return out;
}

namespace {

// Both-branch traversal over a batch: rows are partitioned at splits on
// features in u and duplicated into both children otherwise; the per-leaf
// probability factor is computed once per (leaf, u).
void walk_batch(const Tree& tree, const AugmentedTree& aug, const Dataset& eval,
                std::uint64_t u_local, int node_id, const std::vector<std::int32_t>& rows,
                std::vector<double>& out) {
  if (rows.empty()) return;
  const Node& node = tree.nodes[static_cast<std::size_t>(node_id)];
  if (node.is_leaf()) {
    const AugmentedLeaf& leaf =
        aug.leaves[static_cast<std::size_t>(aug.leaf_slot[static_cast<std::size_t>(node_id)])];
    const std::size_t idx = AugmentedTree::pack_index(u_local & leaf.path_mask, leaf.path_mask);
    const double add =
        node.value * (static_cast<double>(leaf.counts[idx]) / static_cast<double>(aug.n_b));
    for (std::int32_t r : rows) out[static_cast<std::size_t>(r)] += add;
    return;
  }
  const int bit = static_cast<int>(
      std::lower_bound(aug.local_features.begin(), aug.local_features.end(), node.feature) -
      aug.local_features.begin());
  if ((u_local >> bit) & 1) {
    std::vector<std::int32_t> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (std::int32_t r : rows) {
      if (eval.at(static_cast<std::size_t>(r), static_cast<std::size_t>(node.feature)) <
          node.threshold)
        left.push_back(r);
      else
        right.push_back(r);
    }
    walk_batch(tree, aug, eval, u_local, node.left, left, out);
    walk_batch(tree, aug, eval, u_local, node.right, right, out);
  } else {
    walk_batch(tree, aug, eval, u_local, node.left, rows, out);
    walk_batch(tree, aug, eval, u_local, node.right, rows, out);
  }
}

std::vector<double> tree_pd_column(const Tree& tree, const AugmentedTree& aug,
                                   const Dataset& eval, std::uint64_t u_local,
                                   const std::vector<std::int32_t>& all_rows) {
  std::vector<double> column(eval.n(), 0.0);
  walk_batch(tree, aug, eval, u_local, tree.root, all_rows, column);
  return column;
}

std::vector<std::int32_t> iota_rows(std::size_t n) {
  std::vector<std::int32_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::int32_t>(i);
  return rows;
}

}  // namespace

std::vector<std::vector<double>> tree_pd_all_subsets(const Tree& tree, const AugmentedTree& aug,
                                                     const Dataset& eval) {
  const std::vector<std::int32_t> rows = iota_rows(eval.n());
  const int f = aug.num_local_features();
  std::vector<std::vector<double>> out(std::size_t{1} << f);
  for (std::uint64_t u = 0; u < out.size(); ++u)
    out[u] = tree_pd_column(tree, aug, eval, u, rows);
  return out;
}

const std::vector<double>* PdCache::find(int tree, std::uint64_t u) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = columns_.find(Key{tree, u});
  return it == columns_.end() ? nullptr : it->second.get();
}

const std::vector<double>* PdCache::insert(int tree, std::uint64_t u,
                                           std::vector<double> column) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto& slot = columns_[Key{tree, u}];
  // A concurrent duplicate carries identical values; first write wins.
  if (!slot) slot = std::make_unique<std::vector<double>>(std::move(column));
  return slot.get();
}

std::size_t PdCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return columns_.size();
}

PdMatrix pd_evaluate_ensemble(const EnsembleAugmentation& aug, const Dataset& eval,
                              const std::vector<FeatureSubset>& subsets, int threads,
                              PdCache* cache) {
  if (eval.n() == 0) throw ValidationError("pd_evaluate_ensemble: empty evaluation batch");
  if (eval.d() != aug.data_dim)
    throw ValidationError("pd_evaluate_ensemble: evaluation points have " +
                          std::to_string(eval.d()) + " columns, background had " +
                          std::to_string(aug.data_dim));
  for (const FeatureSubset& s : subsets)
    if (s.max_feature() >= static_cast<int>(aug.data_dim))
      throw ValidationError("subset references feature index " +
                            std::to_string(s.max_feature()) + " >= d = " +
                            std::to_string(aug.data_dim));
  eval.check_finite();

  PdMatrix result;
  result.n_rows = eval.n();
  result.n_cols = subsets.size();
  result.values.assign(result.n_rows * result.n_cols, aug.model->intercept);
  if (subsets.empty()) return result;

  const int n_trees = static_cast<int>(aug.trees.size());
  // Per tree: the requested subsets collapse onto distinct reduced masks;
  // each distinct mask is evaluated once per batch.
  std::vector<std::vector<const std::vector<double>*>> per_tree_columns(
      static_cast<std::size_t>(n_trees));
  PdCache* effective_cache = cache;
  PdCache fallback_cache;
  if (!effective_cache) effective_cache = &fallback_cache;

  const std::vector<std::int32_t> rows = iota_rows(eval.n());
  parallel_for(n_trees, threads, [&](int t) {
    const Tree& tree = aug.model->trees[static_cast<std::size_t>(t)];
    const AugmentedTree& at = aug.trees[static_cast<std::size_t>(t)];
    auto& cols = per_tree_columns[static_cast<std::size_t>(t)];
    cols.resize(subsets.size(), nullptr);
    std::unordered_map<std::uint64_t, const std::vector<double>*> seen;
    for (std::size_t si = 0; si < subsets.size(); ++si) {
      const std::uint64_t u = at.reduce(subsets[si]);
      auto it = seen.find(u);
      if (it == seen.end()) {
        const std::vector<double>* col = effective_cache->find(t, u);
        if (!col) col = effective_cache->insert(t, u, tree_pd_column(tree, at, eval, u, rows));
        it = seen.emplace(u, col).first;
      }
      cols[si] = it->second;
    }
  });

  // Fixed reduction order: trees ascending, so outputs do not depend on the
  // thread count.
  for (int t = 0; t < n_trees; ++t) {
    const auto& cols = per_tree_columns[static_cast<std::size_t>(t)];
    for (std::size_t si = 0; si < subsets.size(); ++si) {
      const std::vector<double>& col = *cols[si];
      for (std::size_t r = 0; r < result.n_rows; ++r) result.at(r, si) += col[r];
    }
  }
  return result;
}

}  // namespace fastpd
