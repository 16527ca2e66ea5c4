#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fastpd/explain.hpp"

namespace fastpd {

// %.17g, enough digits for an exact double round-trip.
std::string format_double(double value);

// Column label for a subset: feature names joined by ':' in ascending index
// order, names resolved through the namer (falls back to "f<i>").
using FeatureNamer = std::function<std::string(int)>;
FeatureNamer namer_from(const Dataset& data);
std::string subset_label(const FeatureSubset& subset, const FeatureNamer& namer);

// Decomposition: one row per evaluation point, a "__intercept" column and
// one column per subset. max_order > 0 truncates the *output* to subsets of
// size <= max_order (the decomposition itself stays exact).
void write_decomposition_csv(std::ostream& out, const Decomposition& decomposition,
                             const FeatureNamer& namer, int max_order = 0);
void write_decomposition_json(std::ostream& out, const Decomposition& decomposition,
                              const FeatureNamer& namer, int max_order = 0);

// SHAP matrix: a "baseline" column plus one "phi_<feature>" column per
// feature.
void write_shap_csv(std::ostream& out, const ShapMatrix& shap, const FeatureNamer& namer);
void write_shap_json(std::ostream& out, const ShapMatrix& shap, const FeatureNamer& namer);

void write_pd_plot_csv(std::ostream& out, const std::vector<PdPlotPoint>& points,
                       const std::string& feature_name);

void write_importance_csv(std::ostream& out,
                          const std::vector<std::pair<FeatureSubset, double>>& importances,
                          const FeatureNamer& namer, int top_k = 0);

}  // namespace fastpd
