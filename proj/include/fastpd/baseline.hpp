#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fastpd/dataset.hpp"
#include "fastpd/model.hpp"
#include "fastpd/subset.hpp"

namespace fastpd {

// Brute-force empirical PD: mean over the background rows of predictions on
// hybrid points (x on S, background row elsewhere). Exact reference
// semantics, no caching, the correctness oracle for the fast path.
double vanilla_pd(const TreeEnsemble& ensemble, const Dataset& background,
                  std::span<const double> x, const FeatureSubset& s);

// Background coverage per node under plain routing, one vector per tree
// indexed by node id.
using CoverageCounts = std::vector<std::vector<std::uint64_t>>;
CoverageCounts compute_coverage(const TreeEnsemble& ensemble, const Dataset& background);

// Coverage-weighted recursive PD approximation for one tree: splits on
// features in S follow x, other splits return the child values weighted by
// child coverage over the node's coverage. A zero-coverage branch gets
// weight zero; a zero-coverage node contributes zero. Inconsistent under
// correlated features, which is the point of keeping it around.
double path_dependent_pd(const Tree& tree, const std::vector<std::uint64_t>& coverage,
                         std::span<const double> x, const FeatureSubset& s);

// Ensemble version: intercept plus per-tree values.
double path_dependent_pd_ensemble(const TreeEnsemble& ensemble, const CoverageCounts& coverage,
                                  std::span<const double> x, const FeatureSubset& s);

struct ShapValues {
  std::vector<double> phi;  // one per feature in [0, d)
  double baseline = 0.0;    // value at the empty subset
};

// Shapley combination (standard weights) of the path-dependent PD values
// over all subsets of [d], d = background.d(). Guarded enumeration.
ShapValues path_dependent_shap(const TreeEnsemble& ensemble, const Dataset& background,
                               std::span<const double> x, int enumeration_guard = 16);

// Same combination over the brute-force empirical PDs.
ShapValues vanilla_shap(const TreeEnsemble& ensemble, const Dataset& background,
                        std::span<const double> x, int enumeration_guard = 16);

}  // namespace fastpd
