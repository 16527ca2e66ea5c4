#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "fastpd/evaluate.hpp"

namespace fastpd {

// Additive functional decomposition of the ensemble over the evaluation
// points: prediction(x) = intercept + sum_S components[S](x_S). Components
// are keyed by feature subsets and sorted by (cardinality, indices); the
// empty set is folded into the intercept.
struct Decomposition {
  double intercept = 0.0;
  std::vector<std::pair<FeatureSubset, std::vector<double>>> components;
  std::shared_ptr<const Dataset> eval_points;

  const std::vector<double>* find(const FeatureSubset& s) const;
  // intercept + sum of all components, row by row (summed in component
  // order). Equals the model prediction up to float error.
  std::vector<double> reconstruction() const;
};

struct DecomposeOptions {
  int threads = 1;
  // Drop components whose values are exactly zero on every row.
  bool prune_zero_components = false;
};

// Runs the subset-lattice inversion per tree (each tree only over its own
// split features) and aggregates components across trees by global subset.
// The ensemble intercept goes into the decomposition intercept.
Decomposition decompose(const EnsembleAugmentation& aug,
                        std::shared_ptr<const Dataset> eval_points,
                        const DecomposeOptions& options = {});

// Reference decompositions through the baseline estimators: the lattice is
// enumerated over the union of split features (guarded), PD values come
// from the brute-force empirical estimator or the coverage-weighted path
// recursion, and the inversion runs per evaluation point. decompose_vanilla
// is the oracle twin of decompose.
Decomposition decompose_vanilla(const TreeEnsemble& ensemble, const Dataset& background,
                                std::shared_ptr<const Dataset> eval_points,
                                int enumeration_guard = 16);
Decomposition decompose_path(const TreeEnsemble& ensemble, const Dataset& background,
                             std::shared_ptr<const Dataset> eval_points,
                             int enumeration_guard = 16);

// Alternating-sign subset-lattice inversion of a complete PD map:
// m_S = sum_{U subseteq S} (-1)^{|S \ U|} v_U. Throws ValidationError when
// a required U is missing.
std::map<FeatureSubset, double> mobius_inverse(const std::map<FeatureSubset, double>& pd_values);
// Inverse direction: v_S = sum_{U subseteq S} m_U.
std::map<FeatureSubset, double> zeta_transform(const std::map<FeatureSubset, double>& components);

struct ShapMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  double baseline = 0.0;        // v_empty = decomposition intercept
  std::vector<double> values;   // n x d, row-major

  double at(std::size_t row, std::size_t feature) const { return values[row * d + feature]; }
  double& at(std::size_t row, std::size_t feature) { return values[row * d + feature]; }
};

// phi_k(x) = sum_{S containing k} m_S(x_S) / |S|. Features the model never
// splits on get zero automatically.
ShapMatrix shap_from_decomposition(const Decomposition& decomposition);

// Shapley weight |S|! (d - |S| - 1)! / d! for a coalition of size s,
// computed with log-space factorials.
double shapley_weight(int subset_size, int d);

// Brute-force Shapley value of feature k from an arbitrary PD evaluator:
// sum over all S subseteq [d] \ {k} of shapley_weight(|S|, d) *
// (pd(S + k) - pd(S)). The evaluator receives the subset and must return
// v_S(x_S) for the point being explained. Guarded enumeration (default
// d <= 16).
double shap_direct(const std::function<double(const FeatureSubset&)>& pd, int d, int k,
                   int enumeration_guard = 16);

// All features at once from one pass over the 2^d PD table.
std::vector<double> shap_all_direct(const std::function<double(const FeatureSubset&)>& pd, int d,
                                    int enumeration_guard = 16);

struct PdPlotPoint {
  double x = 0.0;
  double pd = 0.0;
};

// One-dimensional PD table for a feature: per evaluation row, (x_k,
// intercept + m_k(x_k)), sorted by x_k.
std::vector<PdPlotPoint> pd_plot(const Decomposition& decomposition, int feature);

// Mean absolute component value per subset, sorted descending. The
// intercept is excluded.
std::vector<std::pair<FeatureSubset, double>> importance(const Decomposition& decomposition);

// Closed-form PD decomposition of f(x) = x1 + 2*x1*x2 under a mean-zero
// background distribution with E[X1 X2] = exy; reference fixture for the
// pipeline on models of that shape.
struct BilinearReference {
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double m12 = 0.0;
  double phi1 = 0.0;
};
BilinearReference bilinear_reference(double x1, double x2, double exy);

}  // namespace fastpd
