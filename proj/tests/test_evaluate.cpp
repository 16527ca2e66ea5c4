#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fastpd/baseline.hpp"
#include "fastpd/errors.hpp"
#include "fastpd/evaluate.hpp"
#include "support/fixtures.hpp"

using namespace fastpd;
namespace ft = fastpd::testing;

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("empirical PD values of the depth-2 fixtures") {
  const Dataset bg = ft::four_point_background();
  const auto x = ft::probe_point();
  for (const Tree& tree : {ft::make_tree_a(), ft::make_tree_b()}) {
    const AugmentedTree aug = augment(tree, bg);
    CHECK(pd_evaluate(tree, aug, x, {}) == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(pd_evaluate(tree, aug, x, {0}) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(pd_evaluate(tree, aug, x, {1}) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(pd_evaluate(tree, aug, x, {0, 1}) == doctest::Approx(10.0).epsilon(1e-12));
  }
}

TEST_CASE("functionally identical trees share every PD value") {
  const Tree a = ft::make_tree_a();
  const Tree b = ft::make_tree_b();
  const Dataset bg = ft::four_point_background();
  const AugmentedTree aug_a = augment(a, bg);
  const AugmentedTree aug_b = augment(b, bg);
  GaussianSampler rng(77);
  const auto subsets = FeatureSubset::full(2).subsets();
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    for (const FeatureSubset& s : subsets) {
      const double va = pd_evaluate(a, aug_a, x, s);
      const double vb = pd_evaluate(b, aug_b, x, s);
      CHECK(std::abs(va - vb) <= 1e-12 * std::max({1.0, std::abs(va), std::abs(vb)}));
    }
  }
}

TEST_CASE("subsets reducing to the same mask share one cached column") {
  // A tree that only splits feature 0: subsets differing on feature 1 all
  // collapse onto the same reduced column.
  Tree stump;
  stump.nodes.push_back({0, 0.0, 1, 2, 0.0});
  stump.nodes.push_back({-1, 0.0, -1, -1, -1.0});
  stump.nodes.push_back({-1, 0.0, -1, -1, 1.0});
  const auto model = std::make_shared<const TreeEnsemble>(ft::ensemble_of(std::move(stump)));
  GaussianSampler rng(13);
  const Dataset bg = ft::random_points(rng, 30, 2, false);
  const Dataset eval = ft::random_points(rng, 10, 2, false);
  const auto aug = augment_ensemble(model, bg);
  PdCache cache;
  const PdMatrix m = pd_evaluate_ensemble(
      aug, eval, {FeatureSubset{}, FeatureSubset{1}, FeatureSubset{0}, FeatureSubset{0, 1}}, 1,
      &cache);
  CHECK(cache.size() == 2);  // only the reduced masks {} and {0}
  for (std::size_t r = 0; r < eval.n(); ++r) {
    CHECK(m.at(r, 0) == m.at(r, 1));
    CHECK(m.at(r, 2) == m.at(r, 3));
  }
}

TEST_CASE("a full subset reduces to the plain prediction") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = ft::random_instance(seed);
    const int d = inst.model->num_features;
    for (const Tree& tree : inst.model->trees) {
      const AugmentedTree aug = augment(tree, inst.background);
      for (std::size_t r = 0; r < 5; ++r) {
        const auto x = inst.eval.row(r);
        CHECK(pd_evaluate(tree, aug, x, FeatureSubset::full(d)) == tree.leaf_value_at(x));
        // Supersets of the split features behave the same.
        CHECK(pd_evaluate(tree, aug, x, tree.split_features()) == tree.leaf_value_at(x));
      }
    }
  }
}

TEST_CASE("per-tree evaluation equals the brute-force estimator") {
  // Random depth<=3 trees over <=200 background rows, all subsets, 20
  // points; oracle is the hybrid-row mean.
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto inst = ft::random_instance(seed, {.max_d = 4, .max_depth = 3, .n_e = 20});
    const int d = inst.model->num_features;
    for (const Tree& tree : inst.model->trees) {
      const AugmentedTree aug = augment(tree, inst.background);
      const TreeEnsemble solo = ft::ensemble_of(tree, d, 0.0);
      for (const FeatureSubset& s : FeatureSubset::full(d).subsets()) {
        for (std::size_t r = 0; r < inst.eval.n(); ++r) {
          const double fast = pd_evaluate(tree, aug, inst.eval.row(r), s);
          const double slow = vanilla_pd(solo, inst.background, inst.eval.row(r), s);
          CHECK(close_rel(fast, slow, 1e-12));
        }
      }
    }
  }
}

TEST_CASE("all_pd_per_tree enumerates the split-feature lattice") {
  SUBCASE("depth-1 stump") {
    Tree stump;
    stump.nodes.push_back({1, 0.0, 1, 2, 0.0});
    stump.nodes.push_back({-1, 0.0, -1, -1, 2.0});
    stump.nodes.push_back({-1, 0.0, -1, -1, 8.0});
    Dataset bg(4, 3);
    bg.at(0, 1) = -1.0;
    bg.at(1, 1) = -0.5;
    bg.at(2, 1) = 0.5;
    bg.at(3, 1) = 1.0;
    const AugmentedTree aug = augment(stump, bg);
    const auto pd = all_pd_per_tree(stump, aug, std::vector<double>{0.0, -2.0, 0.0});
    REQUIRE(pd.size() == 2);
    CHECK(pd.at(FeatureSubset{}) == doctest::Approx(5.0).epsilon(1e-15));  // (2+2+8+8)/4
    CHECK(pd.at(FeatureSubset{1}) == 2.0);
  }

  SUBCASE("matches pd_evaluate subset by subset") {
    const Tree tree = ft::make_two_level_tree(1.5, -2.0, 4.0);
    GaussianSampler rng(3);
    const Dataset bg = ft::random_points(rng, 40, 2, false);
    const AugmentedTree aug = augment(tree, bg);
    const std::vector<double> x{0.2, -0.4};
    const auto pd = all_pd_per_tree(tree, aug, x);
    REQUIRE(pd.size() == 4);
    for (const auto& [s, value] : pd) CHECK(value == pd_evaluate(tree, aug, x, s));
  }

  SUBCASE("second fixture tree reproduces the shared PD table") {
    const Tree tree = ft::make_tree_b();
    const AugmentedTree aug = augment(tree, ft::four_point_background());
    const auto pd = all_pd_per_tree(tree, aug, ft::probe_point());
    CHECK(pd.at(FeatureSubset{}) == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(pd.at(FeatureSubset{0}) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(pd.at(FeatureSubset{1}) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(pd.at(FeatureSubset{0, 1}) == doctest::Approx(10.0).epsilon(1e-12));
  }
}

TEST_CASE("ensemble evaluation: trivial subsets") {
  const auto inst = ft::random_instance(7);
  const auto aug = augment_ensemble(inst.model, inst.background);
  const int d = inst.model->num_features;

  const PdMatrix m = pd_evaluate_ensemble(
      aug, inst.eval, {FeatureSubset{}, FeatureSubset::full(d)});
  double mean_pred = 0.0;
  for (std::size_t i = 0; i < inst.background.n(); ++i)
    mean_pred += inst.model->predict(inst.background.row(i));
  mean_pred /= static_cast<double>(inst.background.n());
  for (std::size_t r = 0; r < inst.eval.n(); ++r) {
    CHECK(close_rel(m.at(r, 0), mean_pred, 1e-12));
    CHECK(m.at(r, 1) == doctest::Approx(inst.model->predict(inst.eval.row(r))).epsilon(1e-12));
  }
}

TEST_CASE("ensemble evaluation equals the brute-force oracle") {
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    const auto inst = ft::random_instance(seed);
    const int d = inst.model->num_features;
    const auto aug = augment_ensemble(inst.model, inst.background);
    const auto subsets = FeatureSubset::full(d).subsets();
    const PdMatrix m = pd_evaluate_ensemble(aug, inst.eval, subsets);
    for (std::size_t c = 0; c < subsets.size(); ++c)
      for (std::size_t r = 0; r < inst.eval.n(); ++r)
        CHECK(close_rel(m.at(r, c),
                        vanilla_pd(*inst.model, inst.background, inst.eval.row(r), subsets[c]),
                        1e-10));
  }
}

TEST_CASE("warm cache results are bit-identical to cold") {
  const auto inst = ft::random_instance(55);
  const int d = inst.model->num_features;
  const auto aug = augment_ensemble(inst.model, inst.background);
  const auto subsets = FeatureSubset::full(d).subsets();

  PdCache cache;
  const PdMatrix cold = pd_evaluate_ensemble(aug, inst.eval, subsets, 1, &cache);
  const std::size_t cached = cache.size();
  CHECK(cached > 0);
  const PdMatrix warm = pd_evaluate_ensemble(aug, inst.eval, subsets, 1, &cache);
  CHECK(cache.size() == cached);  // nothing recomputed
  CHECK(warm.values == cold.values);

  const PdMatrix fresh = pd_evaluate_ensemble(aug, inst.eval, subsets, 1, nullptr);
  CHECK(fresh.values == cold.values);
}

TEST_CASE("thread count does not change the numbers") {
  const auto inst = ft::random_instance(56);
  const int d = inst.model->num_features;
  const auto aug = augment_ensemble(inst.model, inst.background);
  const auto subsets = FeatureSubset::full(d).subsets();
  const PdMatrix one = pd_evaluate_ensemble(aug, inst.eval, subsets, 1);
  const PdMatrix four = pd_evaluate_ensemble(aug, inst.eval, subsets, 4);
  CHECK(one.values == four.values);
}

TEST_CASE("compacted augmentation evaluates identically") {
  const auto inst = ft::random_instance(57);
  const int d = inst.model->num_features;
  auto with_lists = augment_ensemble(inst.model, inst.background, {.keep_lists = true});
  const auto subsets = FeatureSubset::full(d).subsets();
  const PdMatrix before = pd_evaluate_ensemble(with_lists, inst.eval, subsets);
  for (auto& tree : with_lists.trees) tree.compact();
  const PdMatrix after = pd_evaluate_ensemble(with_lists, inst.eval, subsets);
  CHECK(before.values == after.values);
}

TEST_CASE("evaluation validates dimensions and subsets") {
  const auto inst = ft::random_instance(58);
  const auto aug = augment_ensemble(inst.model, inst.background);
  CHECK_THROWS_AS(
      pd_evaluate_ensemble(aug, Dataset(3, inst.background.d() + 1), {FeatureSubset{}}),
      ValidationError);
  CHECK_THROWS_AS(pd_evaluate_ensemble(aug, Dataset(0, inst.background.d()), {FeatureSubset{}}),
                  ValidationError);
  CHECK_THROWS_AS(
      pd_evaluate_ensemble(aug, inst.eval, {FeatureSubset{static_cast<int>(inst.background.d())}}),
      ValidationError);
}

TEST_CASE("snapshot-loaded augmentation evaluates identically") {
  const auto inst = ft::random_instance(59);
  const int d = inst.model->num_features;
  const auto aug = augment_ensemble(inst.model, inst.background);
  std::ostringstream buffer;
  save_augmentation(aug, buffer);
  std::istringstream in(buffer.str());
  const auto loaded = load_augmentation(inst.model, in);
  const auto subsets = FeatureSubset::full(d).subsets();
  CHECK(pd_evaluate_ensemble(loaded, inst.eval, subsets).values ==
        pd_evaluate_ensemble(aug, inst.eval, subsets).values);
}
