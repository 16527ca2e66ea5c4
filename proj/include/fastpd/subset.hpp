#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace fastpd {

// A set of feature indices backed by a bitmask of arbitrary width.
// Represents the sets S and U of the partial-dependence machinery and the
// per-leaf path features. Equality, hashing, subset tests, intersection and
// subset enumeration are exact set operations.
//
// Hot per-tree loops do not use this class; they intern a tree's split
// features into a local std::uint64_t mask (a tree splits on far fewer than
// 64 features) and only convert back at API boundaries, so the global
// feature count is not limited to 64.
class FeatureSubset {
 public:
  FeatureSubset() = default;
  FeatureSubset(std::initializer_list<int> indices);

  static FeatureSubset single(int index);
  static FeatureSubset full(int d);  // {0, ..., d-1}
  static FeatureSubset from_indices(const std::vector<int>& indices);
  // Interprets bit i of `mask` as feature `features[i]`.
  static FeatureSubset from_local_mask(std::uint64_t mask,
                                       const std::vector<int>& features);

  void set(int index);
  void reset(int index);
  bool test(int index) const;

  int count() const;
  bool empty() const { return words_.empty(); }
  // Largest contained index, or -1 when empty.
  int max_feature() const;

  bool is_subset_of(const FeatureSubset& other) const;
  bool contains(const FeatureSubset& other) const { return other.is_subset_of(*this); }

  FeatureSubset operator&(const FeatureSubset& other) const;
  FeatureSubset operator|(const FeatureSubset& other) const;
  // Set difference: elements of *this not in `other`.
  FeatureSubset minus(const FeatureSubset& other) const;
  // Complement relative to [d).
  FeatureSubset complement(int d) const;

  std::vector<int> indices() const;  // ascending

  // All 2^count() subsets of this set, in increasing local-mask order
  // (so the empty set comes first and *this last). Guarded for count() <= 24.
  std::vector<FeatureSubset> subsets() const;

  bool operator==(const FeatureSubset& other) const { return words_ == other.words_; }
  bool operator!=(const FeatureSubset& other) const { return !(*this == other); }
  // Total order usable as a map key: word-wise, most-significant first.
  bool operator<(const FeatureSubset& other) const;

  std::size_t hash() const;

 private:
  void trim();

  // Bit i of words_[w] is feature index 64*w + i. Trailing zero words are
  // trimmed so equal sets compare equal regardless of history.
  std::vector<std::uint64_t> words_;
};

struct FeatureSubsetHash {
  std::size_t operator()(const FeatureSubset& s) const { return s.hash(); }
};

// Orders subsets by cardinality first, then by ascending indices; the order
// used for output columns.
bool subset_order_less(const FeatureSubset& a, const FeatureSubset& b);

}  // namespace fastpd
