#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "fastpd/augment.hpp"

namespace fastpd {

// One tree's contribution to the empirical PD function v_S(x_S): traverse
// from the root, following x at splits on features in S ∩ split_features
// and descending into both children otherwise; each reached leaf j
// contributes value_j * |D_{U ∩ T_j}| / n_b. No ensemble intercept.
double pd_evaluate(const Tree& tree, const AugmentedTree& aug, std::span<const double> x,
                   const FeatureSubset& s);

// v_U for every U subseteq the tree's split features, keyed by global
// subsets. Tree contribution only.
std::map<FeatureSubset, double> all_pd_per_tree(const Tree& tree, const AugmentedTree& aug,
                                                std::span<const double> x);

// Dense per-tree PD columns over an evaluation batch: result[u] is the
// column of tree contributions for the local subset mask u, for every
// u in [0, 2^F). Shared building block of pd_evaluate_ensemble and
// decompose.
std::vector<std::vector<double>> tree_pd_all_subsets(const Tree& tree, const AugmentedTree& aug,
                                                     const Dataset& eval);

// Evaluated per-tree PD columns, keyed by (tree index, reduced local subset
// mask). Bound to one (augmentation, evaluation batch) pair; reusing it
// with anything else is a caller error. Safe for concurrent readers with
// serialized insertion; a column computed twice concurrently is identical,
// so duplicate insertion is benign.
class PdCache {
 public:
  // Returns nullptr on a miss. The pointer stays valid for the cache's
  // lifetime.
  const std::vector<double>* find(int tree, std::uint64_t u) const;
  const std::vector<double>* insert(int tree, std::uint64_t u, std::vector<double> column);

  std::size_t size() const;

 private:
  struct Key {
    int tree;
    std::uint64_t mask;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>{}(k.mask * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(k.tree));
    }
  };
  mutable std::mutex mutex_;
  std::unordered_map<Key, std::unique_ptr<std::vector<double>>, KeyHash> columns_;
};

// Row-major matrix of v_S(x_S): one row per evaluation point, one column
// per requested subset.
struct PdMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * n_cols + col]; }
  double& at(std::size_t row, std::size_t col) { return values[row * n_cols + col]; }
};

// Ensemble-level empirical PD: intercept plus the per-tree contributions.
// Per tree, every requested subset is first reduced to U = S ∩
// split_features and each distinct U is evaluated once for the whole batch
// (both-branch traversal carrying the evaluation rows). Results are
// independent of the thread count. An optional cache carries reduced-subset
// columns across calls with the same augmentation and batch.
PdMatrix pd_evaluate_ensemble(const EnsembleAugmentation& aug, const Dataset& eval,
                              const std::vector<FeatureSubset>& subsets, int threads = 1,
                              PdCache* cache = nullptr);

}  // namespace fastpd
