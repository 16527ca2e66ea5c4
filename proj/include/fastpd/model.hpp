#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fastpd/subset.hpp"

namespace fastpd {

// One node of a binary regression tree. Internal nodes carry a threshold
// split, leaves carry a constant value. Routing is strict: x < threshold
// goes left, x >= threshold goes right.
struct Node {
  int feature = -1;  // split feature index; -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf value, meaningful for leaves only

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<Node> nodes;
  int root = 0;

  // Longest root-to-leaf path, counted in edges. 0 for a single leaf.
  int depth() const;
  int leaf_count() const;
  // Exact set of features used at internal nodes.
  FeatureSubset split_features() const;
  // Leaf value at x (strict-less-than routing).
  double leaf_value_at(std::span<const double> x) const;
  // Index of the leaf node reached by x.
  int leaf_id_at(std::span<const double> x) const;

  // Checks the structural invariants: node ids form a single rooted binary
  // tree, internal nodes have both children, leaves neither, and all split
  // feature indices are < num_features. Throws ValidationError.
  void validate(int num_features) const;
};

// A tree ensemble as a piecewise-constant function: prediction is the
// intercept (base score) plus the sum of per-tree leaf values. Immutable
// after parsing; predict is reentrant.
struct TreeEnsemble {
  std::vector<Tree> trees;
  double intercept = 0.0;
  int num_features = 0;

  // x must supply at least num_features finite coordinates.
  double predict(std::span<const double> x) const;

  int max_depth() const;
  void validate() const;
  // Widened copy for use with data that carries extra columns the model
  // never splits on. d must be >= num_features.
  TreeEnsemble with_num_features(int d) const;
};

enum class ModelFormat {
  kXgboostJson,  // booster dump: JSON array of nested per-tree node records
  kNativeJson,   // the minimal lossless schema written by serialize_native
};

ModelFormat model_format_from_string(const std::string& name);

// Parses a model dump. Only numeric threshold splits are supported;
// categorical splits and missing-value default branches that route to a
// third node are rejected with the offending node named. `base_score` is
// used when the document does not define an intercept (the xgboost dump
// array never does).
TreeEnsemble parse_model(const std::string& document, ModelFormat format,
                         double base_score = 0.0);
TreeEnsemble parse_model_file(const std::string& path, ModelFormat format,
                              double base_score = 0.0);

// Lossless round-trip schema:
// { "num_features": int, "intercept": float, "trees":
//   [ { "nodes": [ {"id", "feature", "threshold", "left", "right", "value"} ] } ] }
std::string serialize_native(const TreeEnsemble& ensemble);

}  // namespace fastpd
