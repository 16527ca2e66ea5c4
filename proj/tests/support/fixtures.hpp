#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here is test-only and deliberately written as straightforward brute force,
// independent of the library's fast paths.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "fastpd/dataset.hpp"
#include "fastpd/model.hpp"
#include "fastpd/subset.hpp"

namespace fastpd::testing {

// --- the two functionally identical depth-2 trees --------------------------
//
// Tree A: root x0 < 0.5, both children x1 < 0.3, leaves (LL, LR, RL, RR) =
// (10, -5, -5, 10). Tree B splits x1 first, then x0; same leaf regions and
// values, so the same function with a different path structure.

inline Tree make_tree_a() {
  Tree t;
  t.nodes.resize(7);
  t.nodes[0] = {0, 0.5, 1, 2, 0.0};
  t.nodes[1] = {1, 0.3, 3, 4, 0.0};
  t.nodes[2] = {1, 0.3, 5, 6, 0.0};
  t.nodes[3] = {-1, 0.0, -1, -1, 10.0};   // x0 < 0.5, x1 < 0.3
  t.nodes[4] = {-1, 0.0, -1, -1, -5.0};   // x0 < 0.5, x1 >= 0.3
  t.nodes[5] = {-1, 0.0, -1, -1, -5.0};   // x0 >= 0.5, x1 < 0.3
  t.nodes[6] = {-1, 0.0, -1, -1, 10.0};   // x0 >= 0.5, x1 >= 0.3
  t.root = 0;
  return t;
}

inline Tree make_tree_b() {
  Tree t;
  t.nodes.resize(7);
  t.nodes[0] = {1, 0.3, 1, 2, 0.0};
  t.nodes[1] = {0, 0.5, 3, 4, 0.0};
  t.nodes[2] = {0, 0.5, 5, 6, 0.0};
  t.nodes[3] = {-1, 0.0, -1, -1, 10.0};   // x1 < 0.3, x0 < 0.5
  t.nodes[4] = {-1, 0.0, -1, -1, -5.0};   // x1 < 0.3, x0 >= 0.5
  t.nodes[5] = {-1, 0.0, -1, -1, -5.0};   // x1 >= 0.3, x0 < 0.5
  t.nodes[6] = {-1, 0.0, -1, -1, 10.0};   // x1 >= 0.3, x0 >= 0.5
  t.root = 0;
  return t;
}

inline TreeEnsemble ensemble_of(Tree tree, int num_features = 2, double intercept = 0.0) {
  TreeEnsemble ens;
  ens.trees.push_back(std::move(tree));
  ens.num_features = num_features;
  ens.intercept = intercept;
  ens.validate();
  return ens;
}

// 2500 rows over {(0,0) x500, (0,0.4) x250, (0.7,0) x250, (0.7,0.4) x1500}.
inline Dataset four_point_background() {
  Dataset data(2500, 2);
  std::size_t r = 0;
  auto fill = [&](std::size_t count, double a, double b) {
    for (std::size_t i = 0; i < count; ++i, ++r) {
      data.at(r, 0) = a;
      data.at(r, 1) = b;
    }
  };
  fill(500, 0.0, 0.0);
  fill(250, 0.0, 0.4);
  fill(250, 0.7, 0.0);
  fill(1500, 0.7, 0.4);
  return data;
}

// Fresh sample from the same four-point distribution (p = .2, .1, .1, .6).
inline Dataset four_point_resample(std::size_t n, std::uint64_t seed) {
  GaussianSampler rng(seed);
  Dataset data(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (u < 0.2) {
      data.at(i, 0) = 0.0;
      data.at(i, 1) = 0.0;
    } else if (u < 0.3) {
      data.at(i, 0) = 0.0;
      data.at(i, 1) = 0.4;
    } else if (u < 0.4) {
      data.at(i, 0) = 0.7;
      data.at(i, 1) = 0.0;
    } else {
      data.at(i, 0) = 0.7;
      data.at(i, 1) = 0.4;
    }
  }
  return data;
}

inline std::vector<double> probe_point() { return {0.1, 0.2}; }

// Root x0 < 0, left child x1 < 0, right child a leaf.
inline Tree make_two_level_tree(double ll = 1.0, double lr = 2.0, double r = 3.0) {
  Tree t;
  t.nodes.resize(5);
  t.nodes[0] = {0, 0.0, 1, 2, 0.0};
  t.nodes[1] = {1, 0.0, 3, 4, 0.0};
  t.nodes[2] = {-1, 0.0, -1, -1, r};
  t.nodes[3] = {-1, 0.0, -1, -1, ll};
  t.nodes[4] = {-1, 0.0, -1, -1, lr};
  t.root = 0;
  return t;
}

// --- random instances -------------------------------------------------------

struct RandomInstanceOptions {
  int min_d = 1;
  int max_d = 4;
  int max_depth = 4;
  int max_trees = 5;
  std::size_t max_n_b = 200;
  std::size_t n_e = 50;
};

struct RandomInstance {
  std::shared_ptr<const TreeEnsemble> model;
  Dataset background;
  Dataset eval;
};

// Recursive random tree: splits get rarer with depth; thresholds are
// sometimes snapped to one decimal so exact threshold duplicates occur.
inline int grow_random_tree(Tree& t, GaussianSampler& rng, int d, int depth_left, bool snap) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  const bool make_leaf = depth_left == 0 || rng.uniform() < 0.25;
  if (make_leaf) {
    t.nodes[static_cast<std::size_t>(id)] = {-1, 0.0, -1, -1, 20.0 * rng.uniform() - 10.0};
    return id;
  }
  const int feature = static_cast<int>(rng.uniform() * d) % d;
  double threshold = 2.0 * rng.uniform() - 1.0;
  if (snap) threshold = std::round(threshold * 10.0) / 10.0;
  const int left = grow_random_tree(t, rng, d, depth_left - 1, snap);
  const int right = grow_random_tree(t, rng, d, depth_left - 1, snap);
  t.nodes[static_cast<std::size_t>(id)] = {feature, threshold, left, right, 0.0};
  return id;
}

inline Tree random_tree(GaussianSampler& rng, int d, int max_depth, bool snap = false) {
  Tree t;
  grow_random_tree(t, rng, d, max_depth, snap);
  // Re-roll single-leaf trees occasionally left by the early-stop rule so
  // most instances exercise real splits.
  if (t.nodes.size() == 1 && max_depth > 0) {
    t = Tree{};
    const int feature = static_cast<int>(rng.uniform() * d) % d;
    t.nodes.push_back({feature, 0.0, 1, 2, 0.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 20.0 * rng.uniform() - 10.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 20.0 * rng.uniform() - 10.0});
  }
  t.root = 0;
  return t;
}

inline Dataset random_points(GaussianSampler& rng, std::size_t n, int d, bool snap) {
  Dataset data(n, static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      double v = 2.0 * rng.uniform() - 1.0;
      if (snap) v = std::round(v * 10.0) / 10.0;
      data.at(i, static_cast<std::size_t>(j)) = v;
    }
  return data;
}

inline RandomInstance random_instance(std::uint64_t seed,
                                      const RandomInstanceOptions& opt = {}) {
  GaussianSampler rng(seed);
  const int span = opt.max_d - opt.min_d + 1;
  const int d = opt.min_d + static_cast<int>(rng.uniform() * span) % span;
  const int depth = 1 + static_cast<int>(rng.uniform() * opt.max_depth) % opt.max_depth;
  const int n_trees = 1 + static_cast<int>(rng.uniform() * opt.max_trees) % opt.max_trees;
  const bool snap = rng.uniform() < 0.3;  // drive exact threshold ties

  TreeEnsemble ens;
  ens.num_features = d;
  ens.intercept = 2.0 * rng.uniform() - 1.0;
  for (int t = 0; t < n_trees; ++t) ens.trees.push_back(random_tree(rng, d, depth, snap));
  ens.validate();

  RandomInstance inst;
  const std::size_t n_b = 5 + static_cast<std::size_t>(rng.uniform() * (opt.max_n_b - 5));
  inst.background = random_points(rng, n_b, d, snap);
  inst.eval = random_points(rng, opt.n_e, d, snap);
  inst.model = std::make_shared<const TreeEnsemble>(std::move(ens));
  return inst;
}

// --- independent oracles ------------------------------------------------------

// Does routing `row` from the root reach `leaf_id` when every split on a
// feature in S is treated as satisfied both ways? Brute-force check of the
// augmentation invariant, walking all compatible paths.
inline bool reaches_leaf_ignoring(const Tree& tree, int leaf_id, std::span<const double> row,
                                  const FeatureSubset& s, int node_id) {
  const Node& node = tree.nodes[static_cast<std::size_t>(node_id)];
  if (node.is_leaf()) return node_id == leaf_id;
  if (s.test(node.feature))
    return reaches_leaf_ignoring(tree, leaf_id, row, s, node.left) ||
           reaches_leaf_ignoring(tree, leaf_id, row, s, node.right);
  const int next =
      row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
  return reaches_leaf_ignoring(tree, leaf_id, row, s, next);
}

inline bool reaches_leaf_ignoring(const Tree& tree, int leaf_id, std::span<const double> row,
                                  const FeatureSubset& s) {
  return reaches_leaf_ignoring(tree, leaf_id, row, s, tree.root);
}

// --- Gaussian-measure PD of a two-feature tree -------------------------------

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(X1 in [a1,b1], X2 in [a2,b2]) under N(0, [[1,rho],[rho,1]]), by Simpson
// quadrature of the conditional-normal slice.
inline double bivariate_box_probability(double a1, double b1, double a2, double b2, double rho) {
  const double lo = std::max(a1, -9.0);
  const double hi = std::min(b1, 9.0);
  if (lo >= hi) return 0.0;
  const double s = std::sqrt(1.0 - rho * rho);
  const int intervals = 8000;  // even
  const double h = (hi - lo) / intervals;
  auto f = [&](double t) {
    const double density = std::exp(-0.5 * t * t) / std::sqrt(2.0 * 3.14159265358979323846);
    return density * (normal_cdf((b2 - rho * t) / s) - normal_cdf((a2 - rho * t) / s));
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

struct LeafBox {
  double value = 0.0;
  // Half-open boxes [lo, hi); routing is strict-less so left gets hi = t
  // and right gets lo = t.
  std::vector<double> lo, hi;
};

inline void collect_leaf_boxes(const Tree& tree, int node_id, std::vector<double> lo,
                               std::vector<double> hi, std::vector<LeafBox>& out) {
  const Node& node = tree.nodes[static_cast<std::size_t>(node_id)];
  if (node.is_leaf()) {
    out.push_back({node.value, std::move(lo), std::move(hi)});
    return;
  }
  const auto f = static_cast<std::size_t>(node.feature);
  std::vector<double> left_hi = hi;
  left_hi[f] = std::min(left_hi[f], node.threshold);
  collect_leaf_boxes(tree, node.left, lo, std::move(left_hi), out);
  std::vector<double> right_lo = lo;
  right_lo[f] = std::max(right_lo[f], node.threshold);
  collect_leaf_boxes(tree, node.right, std::move(right_lo), std::move(hi), out);
}

inline std::vector<LeafBox> leaf_boxes(const Tree& tree, int d) {
  std::vector<LeafBox> out;
  const double inf = std::numeric_limits<double>::infinity();
  collect_leaf_boxes(tree, tree.root, std::vector<double>(static_cast<std::size_t>(d), -inf),
                     std::vector<double>(static_cast<std::size_t>(d), inf), out);
  return out;
}

// Population PD of a two-feature tree under correlated standard normals:
// per leaf box, indicator on the fixed coordinates times the Gaussian mass
// of the averaged coordinates.
inline double gaussian_pd_2d(const Tree& tree, std::span<const double> x, const FeatureSubset& s,
                             double rho) {
  double acc = 0.0;
  for (const LeafBox& box : leaf_boxes(tree, 2)) {
    bool inside = true;
    for (int k : s.indices()) {
      const auto f = static_cast<std::size_t>(k);
      if (!(x[f] >= box.lo[f] && x[f] < box.hi[f])) inside = false;
    }
    if (!inside) continue;
    double mass = 1.0;
    const bool avg0 = !s.test(0), avg1 = !s.test(1);
    if (avg0 && avg1)
      mass = bivariate_box_probability(box.lo[0], box.hi[0], box.lo[1], box.hi[1], rho);
    else if (avg0)
      mass = normal_cdf(std::min(box.hi[0], 9.0)) - normal_cdf(std::max(box.lo[0], -9.0));
    else if (avg1)
      mass = normal_cdf(std::min(box.hi[1], 9.0)) - normal_cdf(std::max(box.lo[1], -9.0));
    acc += box.value * mass;
  }
  return acc;
}

}  // namespace fastpd::testing
