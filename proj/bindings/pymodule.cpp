#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "fastpd/baseline.hpp"
#include "fastpd/bench.hpp"
#include "fastpd/dataset.hpp"
#include "fastpd/errors.hpp"
#include "fastpd/evaluate.hpp"
#include "fastpd/explain.hpp"
#include "fastpd/io.hpp"
#include "fastpd/model.hpp"

namespace py = pybind11;
using namespace fastpd;

namespace {

Dataset dataset_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                           std::vector<std::string> names = {}) {
  const auto buf = a.request();
  if (buf.ndim != 2) throw ValidationError("expected a 2-d array of shape (n, d)");
  const auto n = static_cast<std::size_t>(buf.shape[0]);
  const auto d = static_cast<std::size_t>(buf.shape[1]);
  const double* ptr = static_cast<const double*>(buf.ptr);
  return Dataset(std::vector<double>(ptr, ptr + n * d), n, d, std::move(names));
}

py::array_t<double> array_from(const std::vector<double>& values, std::size_t n, std::size_t d) {
  py::array_t<double> out({n, d});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<double> vector_to_array(const std::vector<double>& values) {
  py::array_t<double> out(static_cast<py::ssize_t>(values.size()));
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

FeatureSubset subset_from(const std::vector<int>& indices) {
  return FeatureSubset::from_indices(indices);
}

std::vector<double> point_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  const auto buf = a.request();
  if (buf.ndim != 1) throw ValidationError("expected a 1-d point");
  const double* ptr = static_cast<const double*>(buf.ptr);
  return std::vector<double>(ptr, ptr + buf.shape[0]);
}

py::tuple subset_to_tuple(const FeatureSubset& s) {
  const auto idx = s.indices();
  py::tuple out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = idx[i];
  return out;
}

}  // namespace

PYBIND11_MODULE(_fastpd, m) {
  m.doc() = "Linear-time empirical partial dependence for tree ensembles";

  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                       std::vector<std::string> names) {
             return dataset_from_array(a, std::move(names));
           }),
           py::arg("values"), py::arg("column_names") = std::vector<std::string>{})
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("d", &Dataset::d)
      .def_property_readonly("column_names", &Dataset::column_names)
      .def_property_readonly(
          "values", [](const Dataset& d) { return array_from(d.values(), d.n(), d.d()); });

  m.def("load_csv_file",
        [](const std::string& path, bool has_header) {
          return load_csv_file(path, has_header ? HasHeader::kYes : HasHeader::kAuto);
        },
        py::arg("path"), py::arg("has_header") = false);
  m.def("save_csv_file", &save_csv_file, py::arg("data"), py::arg("path"),
        py::arg("write_header") = true);

  m.def("generate_dgp",
        [](const std::string& kind, std::size_t n, std::uint64_t seed, int dimension) {
          Dgp dgp;
          if (kind == "dgp1") dgp = Dgp::kDgp1;
          else if (kind == "dgp2") dgp = Dgp::kDgp2;
          else throw ValidationError("unknown dgp '" + kind + "'");
          auto generated = generate_dgp(dgp, n, seed, dimension);
          return py::make_tuple(
              array_from(generated.x.values(), generated.x.n(), generated.x.d()),
              vector_to_array(generated.y));
        },
        py::arg("kind"), py::arg("n"), py::arg("seed"), py::arg("dimension") = 0);

  py::class_<TreeEnsemble, std::shared_ptr<TreeEnsemble>>(m, "TreeEnsemble")
      .def_readonly("intercept", &TreeEnsemble::intercept)
      .def_readonly("num_features", &TreeEnsemble::num_features)
      .def_property_readonly("num_trees",
                             [](const TreeEnsemble& e) { return e.trees.size(); })
      .def_property_readonly("max_depth", &TreeEnsemble::max_depth)
      .def("with_num_features", &TreeEnsemble::with_num_features, py::arg("d"))
      .def("serialize", [](const TreeEnsemble& e) { return serialize_native(e); })
      .def("predict",
           [](const TreeEnsemble& e,
              const py::array_t<double, py::array::c_style | py::array::forcecast>& a) -> py::object {
             const auto buf = a.request();
             if (buf.ndim == 1) return py::float_(e.predict(point_from(a)));
             const Dataset rows = dataset_from_array(a);
             py::array_t<double> out(static_cast<py::ssize_t>(rows.n()));
             for (std::size_t i = 0; i < rows.n(); ++i)
               out.mutable_data()[i] = e.predict(rows.row(i));
             return out;
           },
           py::arg("x"));

  m.def("parse_model",
        [](const std::string& document, const std::string& format, double base_score) {
          return std::make_shared<TreeEnsemble>(
              parse_model(document, model_format_from_string(format), base_score));
        },
        py::arg("document"), py::arg("format") = "native-json", py::arg("base_score") = 0.0);
  m.def("parse_model_file",
        [](const std::string& path, const std::string& format, double base_score) {
          return std::make_shared<TreeEnsemble>(
              parse_model_file(path, model_format_from_string(format), base_score));
        },
        py::arg("path"), py::arg("format") = "native-json", py::arg("base_score") = 0.0);

  py::class_<EnsembleAugmentation>(m, "EnsembleAugmentation")
      .def_property_readonly("n_background",
                             [](const EnsembleAugmentation& a) { return a.n_b; })
      .def_property_readonly("data_dim",
                             [](const EnsembleAugmentation& a) { return a.data_dim; });

  m.def("augment_ensemble",
        [](const std::shared_ptr<TreeEnsemble>& model, const Dataset& background,
           std::uint64_t budget_lists, int threads) {
          AugmentOptions options;
          options.budget_lists = budget_lists;
          options.keep_lists = false;
          return augment_ensemble(model, background, options, threads);
        },
        py::arg("model"), py::arg("background"),
        py::arg("budget_lists") = std::uint64_t{1} << 20, py::arg("threads") = 1);
  m.def("save_augmentation_file", &save_augmentation_file, py::arg("augmentation"),
        py::arg("path"));
  m.def("load_augmentation_file",
        [](const std::shared_ptr<TreeEnsemble>& model, const std::string& path) {
          return load_augmentation_file(model, path);
        },
        py::arg("model"), py::arg("path"));

  m.def("pd_values",
        [](const EnsembleAugmentation& aug, const Dataset& eval,
           const std::vector<std::vector<int>>& subsets, int threads) {
          std::vector<FeatureSubset> keys;
          keys.reserve(subsets.size());
          for (const auto& s : subsets) keys.push_back(subset_from(s));
          const PdMatrix matrix = pd_evaluate_ensemble(aug, eval, keys, threads);
          return array_from(matrix.values, matrix.n_rows, matrix.n_cols);
        },
        py::arg("augmentation"), py::arg("eval"), py::arg("subsets"), py::arg("threads") = 1);

  py::class_<Decomposition>(m, "Decomposition")
      .def_readonly("intercept", &Decomposition::intercept)
      .def("components",
           [](const Decomposition& dec) {
             py::dict out;
             for (const auto& [subset, values] : dec.components)
               out[subset_to_tuple(subset)] = vector_to_array(values);
             return out;
           })
      .def("reconstruction",
           [](const Decomposition& dec) { return vector_to_array(dec.reconstruction()); });

  m.def("decompose",
        [](const EnsembleAugmentation& aug, const Dataset& eval, int threads, bool prune) {
          return decompose(aug, std::make_shared<const Dataset>(eval),
                           {.threads = threads, .prune_zero_components = prune});
        },
        py::arg("augmentation"), py::arg("eval"), py::arg("threads") = 1,
        py::arg("prune_zero_components") = false);
  m.def("decompose_vanilla",
        [](const std::shared_ptr<TreeEnsemble>& model, const Dataset& background,
           const Dataset& eval, int guard) {
          return decompose_vanilla(*model, background, std::make_shared<const Dataset>(eval),
                                   guard);
        },
        py::arg("model"), py::arg("background"), py::arg("eval"),
        py::arg("enumeration_guard") = 16);
  m.def("decompose_path",
        [](const std::shared_ptr<TreeEnsemble>& model, const Dataset& background,
           const Dataset& eval, int guard) {
          return decompose_path(*model, background, std::make_shared<const Dataset>(eval), guard);
        },
        py::arg("model"), py::arg("background"), py::arg("eval"),
        py::arg("enumeration_guard") = 16);

  py::class_<ShapMatrix>(m, "ShapMatrix")
      .def_readonly("baseline", &ShapMatrix::baseline)
      .def_property_readonly(
          "values", [](const ShapMatrix& s) { return array_from(s.values, s.n, s.d); });

  m.def("shap_from_decomposition", &shap_from_decomposition, py::arg("decomposition"));
  m.def("shap_direct",
        [](const py::function& pd, int d, int k, int guard) {
          return shap_direct(
              [&](const FeatureSubset& s) { return pd(subset_to_tuple(s)).cast<double>(); }, d, k,
              guard);
        },
        py::arg("pd"), py::arg("d"), py::arg("k"), py::arg("enumeration_guard") = 16);

  m.def("pd_plot",
        [](const Decomposition& dec, int feature) {
          const auto points = pd_plot(dec, feature);
          py::array_t<double> out({points.size(), std::size_t{2}});
          for (std::size_t i = 0; i < points.size(); ++i) {
            out.mutable_data()[2 * i] = points[i].x;
            out.mutable_data()[2 * i + 1] = points[i].pd;
          }
          return out;
        },
        py::arg("decomposition"), py::arg("feature"));

  m.def("importance",
        [](const Decomposition& dec) {
          py::list out;
          for (const auto& [subset, value] : importance(dec))
            out.append(py::make_tuple(subset_to_tuple(subset), value));
          return out;
        },
        py::arg("decomposition"));

  m.def("vanilla_pd",
        [](const std::shared_ptr<TreeEnsemble>& model, const Dataset& background,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           const std::vector<int>& subset) {
          return vanilla_pd(*model, background, point_from(x), subset_from(subset));
        },
        py::arg("model"), py::arg("background"), py::arg("x"), py::arg("subset"));

  m.def("vanilla_shap",
        [](const std::shared_ptr<TreeEnsemble>& model, const Dataset& background,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
          const ShapValues values = vanilla_shap(*model, background, point_from(x));
          return py::make_tuple(values.baseline, vector_to_array(values.phi));
        },
        py::arg("model"), py::arg("background"), py::arg("x"));
  m.def("path_dependent_shap",
        [](const std::shared_ptr<TreeEnsemble>& model, const Dataset& background,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
          const ShapValues values = path_dependent_shap(*model, background, point_from(x));
          return py::make_tuple(values.baseline, vector_to_array(values.phi));
        },
        py::arg("model"), py::arg("background"), py::arg("x"));

  m.attr("__version__") = "0.1.0";
}
