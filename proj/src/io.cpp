#include "fastpd/io.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "fastpd/errors.hpp"

namespace fastpd {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

FeatureNamer namer_from(const Dataset& data) {
  // Copy the names so the namer does not dangle.
  std::vector<std::string> names = data.column_names();
  return [names](int i) {
    if (i >= 0 && static_cast<std::size_t>(i) < names.size() && !names[static_cast<std::size_t>(i)].empty())
      return names[static_cast<std::size_t>(i)];
    return "f" + std::to_string(i);
  };
}

std::string subset_label(const FeatureSubset& subset, const FeatureNamer& namer) {
  std::string out;
  for (int i : subset.indices()) {
    if (!out.empty()) out.push_back(':');
    out += namer(i);
  }
  return out;
}

namespace {

bool within_order(const FeatureSubset& s, int max_order) {
  return max_order <= 0 || s.count() <= max_order;
}

}  // namespace

void write_decomposition_csv(std::ostream& out, const Decomposition& decomposition,
                             const FeatureNamer& namer, int max_order) {
  out << "__intercept";
  for (const auto& [subset, values] : decomposition.components)
    if (within_order(subset, max_order)) out << ',' << subset_label(subset, namer);
  out << '\n';
  const std::size_t n =
      decomposition.eval_points ? decomposition.eval_points->n()
                                : (decomposition.components.empty()
                                       ? 0
                                       : decomposition.components.front().second.size());
  for (std::size_t r = 0; r < n; ++r) {
    out << format_double(decomposition.intercept);
    for (const auto& [subset, values] : decomposition.components)
      if (within_order(subset, max_order)) out << ',' << format_double(values[r]);
    out << '\n';
  }
}

void write_decomposition_json(std::ostream& out, const Decomposition& decomposition,
                              const FeatureNamer& namer, int max_order) {
  nlohmann::json doc;
  doc["intercept"] = decomposition.intercept;
  doc["components"] = nlohmann::json::array();
  for (const auto& [subset, values] : decomposition.components) {
    if (!within_order(subset, max_order)) continue;
    nlohmann::json entry;
    entry["features"] = subset.indices();
    entry["name"] = subset_label(subset, namer);
    entry["values"] = values;
    doc["components"].push_back(std::move(entry));
  }
  out << doc.dump(2) << '\n';
}

void write_shap_csv(std::ostream& out, const ShapMatrix& shap, const FeatureNamer& namer) {
  out << "baseline";
  for (std::size_t k = 0; k < shap.d; ++k) out << ",phi_" << namer(static_cast<int>(k));
  out << '\n';
  for (std::size_t r = 0; r < shap.n; ++r) {
    out << format_double(shap.baseline);
    for (std::size_t k = 0; k < shap.d; ++k) out << ',' << format_double(shap.at(r, k));
    out << '\n';
  }
}

void write_shap_json(std::ostream& out, const ShapMatrix& shap, const FeatureNamer& namer) {
  nlohmann::json doc;
  doc["baseline"] = shap.baseline;
  doc["features"] = nlohmann::json::array();
  for (std::size_t k = 0; k < shap.d; ++k) doc["features"].push_back(namer(static_cast<int>(k)));
  doc["phi"] = nlohmann::json::array();
  for (std::size_t r = 0; r < shap.n; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < shap.d; ++k) row.push_back(shap.at(r, k));
    doc["phi"].push_back(std::move(row));
  }
  out << doc.dump(2) << '\n';
}

void write_pd_plot_csv(std::ostream& out, const std::vector<PdPlotPoint>& points,
                       const std::string& feature_name) {
  out << feature_name << ",pd\n";
  for (const PdPlotPoint& p : points)
    out << format_double(p.x) << ',' << format_double(p.pd) << '\n';
}

void write_importance_csv(std::ostream& out,
                          const std::vector<std::pair<FeatureSubset, double>>& importances,
                          const FeatureNamer& namer, int top_k) {
  out << "component,importance\n";
  std::size_t limit = importances.size();
  if (top_k > 0) limit = std::min(limit, static_cast<std::size_t>(top_k));
  for (std::size_t i = 0; i < limit; ++i)
    out << subset_label(importances[i].first, namer) << ','
        << format_double(importances[i].second) << '\n';
}

}  // namespace fastpd
