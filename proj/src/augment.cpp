#include "fastpd/augment.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include "fastpd/errors.hpp"
#include "fastpd/threads.hpp"

namespace fastpd {

std::size_t AugmentedTree::pack_index(std::uint64_t subset, std::uint64_t path_mask) {
  std::size_t index = 0;
  int out_bit = 0;
  while (path_mask != 0) {
    const std::uint64_t low = path_mask & (~path_mask + 1);
    if (subset & low) index |= std::size_t{1} << out_bit;
    ++out_bit;
    path_mask &= path_mask - 1;
  }
  return index;
}

std::uint64_t AugmentedTree::reduce(const FeatureSubset& s) const {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < local_features.size(); ++i)
    if (s.test(local_features[i])) mask |= std::uint64_t{1} << i;
  return mask;
}

FeatureSubset AugmentedTree::to_global(std::uint64_t local_mask) const {
  return FeatureSubset::from_local_mask(local_mask, local_features);
}

void AugmentedTree::compact() {
  for (AugmentedLeaf& leaf : leaves) {
    leaf.lists.clear();
    leaf.lists.shrink_to_fit();
  }
}

namespace {

struct PartitionList {
  std::uint64_t mask = 0;
  std::vector<std::int32_t> rows;
};

struct AugmentContext {
  const Tree* tree;
  const Dataset* background;
  const AugmentOptions* options;
  // global feature id -> local bit, -1 when the tree never splits on it
  std::vector<int> local_of_global;
  AugmentedTree out;
};

void descend(AugmentContext& ctx, int node_id, std::uint64_t path_mask,
             std::vector<PartitionList> lists) {
  const Node& node = ctx.tree->nodes[static_cast<std::size_t>(node_id)];
  if (node.is_leaf()) {
    AugmentedLeaf leaf;
    leaf.leaf_id = node_id;
    leaf.path_mask = path_mask;
    const std::size_t expected = std::size_t{1} << std::popcount(path_mask);
    leaf.counts.assign(expected, 0);
    if (ctx.options->keep_lists) leaf.lists.resize(expected);
    for (PartitionList& pl : lists) {
      const std::size_t idx = AugmentedTree::pack_index(pl.mask, path_mask);
      leaf.counts[idx] = pl.rows.size();
      if (ctx.options->keep_lists) leaf.lists[idx] = std::move(pl.rows);
    }
    ctx.out.leaf_slot[static_cast<std::size_t>(node_id)] =
        static_cast<int>(ctx.out.leaves.size());
    ctx.out.leaves.push_back(std::move(leaf));
    return;
  }

  const int bit = ctx.local_of_global[static_cast<std::size_t>(node.feature)];
  const std::uint64_t fbit = std::uint64_t{1} << bit;
  const bool first_on_path = (path_mask & fbit) == 0;
  const Dataset& bg = *ctx.background;

  std::vector<PartitionList> left_lists, right_lists;
  left_lists.reserve(lists.size() * (first_on_path ? 2 : 1));
  right_lists.reserve(lists.size() * (first_on_path ? 2 : 1));
  for (const PartitionList& pl : lists) {
    if (first_on_path) {
      // The rows reaching this node while also ignoring the new feature are
      // exactly the rows here, unfiltered.
      left_lists.push_back({pl.mask | fbit, pl.rows});
      right_lists.push_back({pl.mask | fbit, pl.rows});
    }
    if (pl.mask & fbit) {
      // Split ignored for this subset: pass unchanged both ways.
      left_lists.push_back(pl);
      right_lists.push_back(pl);
    } else {
      PartitionList l{pl.mask, {}}, r{pl.mask, {}};
      for (std::int32_t row : pl.rows) {
        if (bg.at(static_cast<std::size_t>(row), static_cast<std::size_t>(node.feature)) <
            node.threshold)
          l.rows.push_back(row);
        else
          r.rows.push_back(row);
      }
      left_lists.push_back(std::move(l));
      right_lists.push_back(std::move(r));
    }
  }
  lists.clear();
  lists.shrink_to_fit();

  descend(ctx, node.left, path_mask | (first_on_path ? fbit : 0), std::move(left_lists));
  descend(ctx, node.right, path_mask | (first_on_path ? fbit : 0), std::move(right_lists));
}

}  // namespace

AugmentedTree augment(const Tree& tree, const Dataset& background,
                      const AugmentOptions& options) {
  if (background.n() == 0) throw ValidationError("augment: empty background sample");
  const FeatureSubset features = tree.split_features();
  if (features.max_feature() >= static_cast<int>(background.d()))
    throw ValidationError("augment: tree splits on feature " +
                          std::to_string(features.max_feature()) + " but background has " +
                          std::to_string(background.d()) + " columns");
  const int f = features.count();
  if (f >= 63 || (std::uint64_t{1} << f) > options.budget_lists)
    throw BudgetError("augment: tree with " + std::to_string(f) +
                      " split features needs 2^" + std::to_string(f) +
                      " partition lists per leaf, over the budget of " +
                      std::to_string(options.budget_lists));

  AugmentContext ctx;
  ctx.tree = &tree;
  ctx.background = &background;
  ctx.options = &options;
  ctx.out.local_features = features.indices();
  ctx.out.leaf_slot.assign(tree.nodes.size(), -1);
  ctx.out.n_b = background.n();
  ctx.local_of_global.assign(
      static_cast<std::size_t>(features.max_feature() + 1), -1);
  for (std::size_t i = 0; i < ctx.out.local_features.size(); ++i)
    ctx.local_of_global[static_cast<std::size_t>(ctx.out.local_features[i])] =
        static_cast<int>(i);

  std::vector<PartitionList> root_lists(1);
  root_lists[0].rows.resize(background.n());
  std::iota(root_lists[0].rows.begin(), root_lists[0].rows.end(), 0);
  descend(ctx, tree.root, 0, std::move(root_lists));
  return std::move(ctx.out);
}

EnsembleAugmentation augment_ensemble(std::shared_ptr<const TreeEnsemble> model,
                                      const Dataset& background, AugmentOptions options,
                                      int threads) {
  if (!model) throw ValidationError("augment_ensemble: null model");
  if (background.d() < static_cast<std::size_t>(model->num_features))
    throw ValidationError("augment_ensemble: background has " + std::to_string(background.d()) +
                          " columns but the model uses " + std::to_string(model->num_features) +
                          " features");
  EnsembleAugmentation out;
  out.model = std::move(model);
  out.n_b = background.n();
  out.data_dim = background.d();
  out.trees.resize(out.model->trees.size());
  parallel_for(static_cast<int>(out.model->trees.size()), threads, [&](int t) {
    out.trees[static_cast<std::size_t>(t)] =
        augment(out.model->trees[static_cast<std::size_t>(t)], background, options);
  });
  return out;
}

// --- snapshot ---------------------------------------------------------------
//
// Little-endian layout:
//   magic "FPDAUG\0\0" | u32 version | u64 n_b | u32 data_dim | u32 n_trees
//   per tree:  u32 n_local | u32 local_features[] | u32 n_leaves
//   per leaf:  u32 leaf_id | u64 path_mask | u64 counts[2^popcount(path_mask)]

namespace {

constexpr char kMagic[8] = {'F', 'P', 'D', 'A', 'U', 'G', 0, 0};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw ParseError("augmentation snapshot: unexpected end of file");
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(value);
}

}  // namespace

void save_augmentation(const EnsembleAugmentation& aug, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint64_t>(out, aug.n_b);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(aug.data_dim));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(aug.trees.size()));
  for (const AugmentedTree& tree : aug.trees) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(tree.local_features.size()));
    for (int f : tree.local_features) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(f));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(tree.leaves.size()));
    for (const AugmentedLeaf& leaf : tree.leaves) {
      write_le<std::uint32_t>(out, static_cast<std::uint32_t>(leaf.leaf_id));
      write_le<std::uint64_t>(out, leaf.path_mask);
      for (std::uint64_t c : leaf.counts) write_le<std::uint64_t>(out, c);
    }
  }
  if (!out) throw Error("augmentation snapshot: write failed");
}

void save_augmentation_file(const EnsembleAugmentation& aug, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write snapshot file '" + path + "'");
  save_augmentation(aug, out);
}

EnsembleAugmentation load_augmentation(std::shared_ptr<const TreeEnsemble> model,
                                       std::istream& in) {
  if (!model) throw ValidationError("load_augmentation: null model");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic))
    throw ParseError("augmentation snapshot: bad magic");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kVersion)
    throw ParseError("augmentation snapshot: unsupported version " + std::to_string(version));

  EnsembleAugmentation aug;
  aug.n_b = read_le<std::uint64_t>(in);
  aug.data_dim = read_le<std::uint32_t>(in);
  const auto n_trees = read_le<std::uint32_t>(in);
  if (n_trees != model->trees.size())
    throw ValidationError("augmentation snapshot: " + std::to_string(n_trees) +
                          " trees but the model has " + std::to_string(model->trees.size()));
  aug.trees.resize(n_trees);
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    const Tree& tree = model->trees[t];
    AugmentedTree& at = aug.trees[t];
    const auto n_local = read_le<std::uint32_t>(in);
    at.local_features.resize(n_local);
    for (auto& f : at.local_features) f = static_cast<int>(read_le<std::uint32_t>(in));
    if (at.local_features != tree.split_features().indices())
      throw ValidationError("augmentation snapshot: tree " + std::to_string(t) +
                            " split features do not match the model");
    const auto n_leaves = read_le<std::uint32_t>(in);
    if (static_cast<int>(n_leaves) != tree.leaf_count())
      throw ValidationError("augmentation snapshot: tree " + std::to_string(t) +
                            " leaf count does not match the model");
    at.leaf_slot.assign(tree.nodes.size(), -1);
    at.n_b = aug.n_b;
    at.leaves.resize(n_leaves);
    for (std::uint32_t l = 0; l < n_leaves; ++l) {
      AugmentedLeaf& leaf = at.leaves[l];
      leaf.leaf_id = static_cast<int>(read_le<std::uint32_t>(in));
      if (leaf.leaf_id < 0 || static_cast<std::size_t>(leaf.leaf_id) >= tree.nodes.size() ||
          !tree.nodes[static_cast<std::size_t>(leaf.leaf_id)].is_leaf())
        throw ValidationError("augmentation snapshot: leaf id " + std::to_string(leaf.leaf_id) +
                              " is not a leaf of tree " + std::to_string(t));
      leaf.path_mask = read_le<std::uint64_t>(in);
      leaf.counts.resize(std::size_t{1} << std::popcount(leaf.path_mask));
      for (auto& c : leaf.counts) c = read_le<std::uint64_t>(in);
      at.leaf_slot[static_cast<std::size_t>(leaf.leaf_id)] = static_cast<int>(l);
    }
  }
  aug.model = std::move(model);
  return aug;
}

EnsembleAugmentation load_augmentation_file(std::shared_ptr<const TreeEnsemble> model,
                                            const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open snapshot file '" + path + "'");
  return load_augmentation(std::move(model), in);
}

}  // namespace fastpd
