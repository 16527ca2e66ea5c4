#pragma once

#include <bit>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "fastpd/dataset.hpp"
#include "fastpd/model.hpp"
#include "fastpd/subset.hpp"

namespace fastpd {

struct AugmentOptions {
  // Refuse a tree whose subset lattice would need more than this many
  // partition lists per leaf (2^F for F distinct split features).
  std::uint64_t budget_lists = std::uint64_t{1} << 20;
  // Keep the per-leaf sample-index lists after augmentation. Evaluation
  // needs only the counts; compact() drops the lists later.
  bool keep_lists = true;
};

// Augmentation output for one leaf: the features T_j encountered on the
// root-to-leaf path and, for every S subseteq T_j, the background rows that
// would have reached this leaf if splits on features in S were ignored.
struct AugmentedLeaf {
  int leaf_id = -1;             // node index within the tree
  std::uint64_t path_mask = 0;  // T_j over the tree's local feature bits
  // One entry per S subseteq path_mask, indexed by the packed rank of S
  // (empty set first, full path set last).
  std::vector<std::uint64_t> counts;
  // Row indices in input order; same indexing as counts. Empty once
  // compacted.
  std::vector<std::vector<std::int32_t>> lists;

  int path_size() const { return std::popcount(path_mask); }
};

struct AugmentedTree {
  // Sorted global ids of the tree's split features; local bit i stands for
  // feature local_features[i].
  std::vector<int> local_features;
  std::vector<AugmentedLeaf> leaves;
  // node id -> index into leaves; -1 for internal nodes.
  std::vector<int> leaf_slot;
  std::size_t n_b = 0;

  int num_local_features() const { return static_cast<int>(local_features.size()); }

  // Packs a submask of path_mask into the dense index used by
  // counts/lists. subset must satisfy subset subseteq path_mask.
  static std::size_t pack_index(std::uint64_t subset, std::uint64_t path_mask);

  // Local mask of a global subset: which of this tree's split features the
  // subset contains.
  std::uint64_t reduce(const FeatureSubset& s) const;
  FeatureSubset to_global(std::uint64_t local_mask) const;

  // Drops the sample-index lists, keeping only the counts (all that the
  // evaluation step reads).
  void compact();
};

// Algorithm: recursive descent from the root carrying one list per subset
// of the path features seen so far. At a node splitting feature f, lists
// whose subset contains f pass to both children untouched; other lists are
// filtered by the routing rule (x < t left, x >= t right). The first time f
// appears on a path, every current list is duplicated under subset ∪ {f}.
AugmentedTree augment(const Tree& tree, const Dataset& background,
                      const AugmentOptions& options = {});

struct EnsembleAugmentation {
  std::shared_ptr<const TreeEnsemble> model;
  std::vector<AugmentedTree> trees;
  std::size_t n_b = 0;
  std::size_t data_dim = 0;
};

// Augments every tree of the ensemble over the same background sample.
// Trees are processed independently (optionally in parallel); results do
// not depend on the thread count. Lists are not kept by default here.
EnsembleAugmentation augment_ensemble(std::shared_ptr<const TreeEnsemble> model,
                                      const Dataset& background,
                                      AugmentOptions options = {.keep_lists = false},
                                      int threads = 1);

// Binary snapshot of an augmented ensemble (versioned header, per-leaf path
// mask + partition counts) so an augmentation can be reused across runs.
// Loading validates the snapshot against the supplied model.
void save_augmentation(const EnsembleAugmentation& aug, std::ostream& out);
void save_augmentation_file(const EnsembleAugmentation& aug, const std::string& path);
EnsembleAugmentation load_augmentation(std::shared_ptr<const TreeEnsemble> model,
                                       std::istream& in);
EnsembleAugmentation load_augmentation_file(std::shared_ptr<const TreeEnsemble> model,
                                            const std::string& path);

}  // namespace fastpd
