// fastpd: partial-dependence explanations for tree ensembles.
//
// Subcommands: decompose, shap, pdplot, bench. Exit codes: 0 success,
// 2 invalid input, 3 resource-budget refusal.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fastpd/baseline.hpp"
#include "fastpd/bench.hpp"
#include "fastpd/dataset.hpp"
#include "fastpd/errors.hpp"
#include "fastpd/evaluate.hpp"
#include "fastpd/explain.hpp"
#include "fastpd/io.hpp"
#include "fastpd/model.hpp"
#include "fastpd/threads.hpp"

namespace {

using namespace fastpd;

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitBudget = 3;

struct CommonArgs {
  std::string model_path;
  std::string format = "native-json";
  std::string background_path;
  std::string eval_path;
  std::string method = "fastpd";
  std::string out_path;
  std::string aug_cache_path;
  double base_score = 0.0;
  int max_order = 0;
  int threads = 0;  // 0: FASTPD_THREADS env, then hardware
  std::uint64_t seed = 0;
  std::uint64_t budget_lists = std::uint64_t{1} << 20;
};

void add_model_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--model", args.model_path, "Model dump file")->required();
  cmd->add_option("--format", args.format, "Model format: native-json | xgboost-json")
      ->check(CLI::IsMember({"native-json", "native", "xgboost-json", "xgboost"}));
  cmd->add_option("--base-score", args.base_score,
                  "Intercept to use when the dump does not define one");
  cmd->add_option("--threads", args.threads,
                  "Worker threads (default: FASTPD_THREADS or all cores)");
  cmd->add_option("--seed", args.seed, "Random seed for commands that sample");
  cmd->add_option("--budget-lists", args.budget_lists,
                  "Per-tree partition-list budget for augmentation");
  cmd->add_option("--out", args.out_path, "Output file (default: stdout; .json selects JSON)");
}

// Background columns may exceed the model's split range; the model is
// widened so features it never uses still get explanation columns.
TreeEnsemble load_model_for(const CommonArgs& args, const Dataset& background) {
  TreeEnsemble model =
      parse_model_file(args.model_path, model_format_from_string(args.format), args.base_score);
  if (background.d() < static_cast<std::size_t>(model.num_features))
    throw ValidationError("background has " + std::to_string(background.d()) +
                          " columns but the model splits features up to index " +
                          std::to_string(model.num_features - 1));
  return model.with_num_features(static_cast<int>(background.d()));
}

Dataset load_eval(const std::string& path) {
  try {
    return load_csv_file(path, HasHeader::kAuto);
  } catch (const ValidationError& e) {
    throw ValidationError("no evaluation rows: " + std::string(e.what()));
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write output file '" + path + "'");
  return out;
}

bool wants_json(const std::string& path) { return path.size() > 5 && path.ends_with(".json"); }

EnsembleAugmentation augment_with_cache(const std::shared_ptr<const TreeEnsemble>& model,
                                        const Dataset& background, const CommonArgs& args) {
  if (!args.aug_cache_path.empty() && std::filesystem::exists(args.aug_cache_path))
    return load_augmentation_file(model, args.aug_cache_path);
  AugmentOptions options;
  options.budget_lists = args.budget_lists;
  options.keep_lists = false;
  EnsembleAugmentation aug = augment_ensemble(model, background, options, args.threads);
  if (!args.aug_cache_path.empty()) save_augmentation_file(aug, args.aug_cache_path);
  return aug;
}

int resolve_feature(const std::string& spec, const Dataset& background) {
  const auto& names = background.column_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == spec) return static_cast<int>(i);
  try {
    std::size_t pos = 0;
    const int idx = std::stoi(spec, &pos);
    if (pos == spec.size() && idx >= 0 && static_cast<std::size_t>(idx) < background.d())
      return idx;
  } catch (const std::exception&) {
  }
  throw ValidationError("unknown feature '" + spec + "'");
}

int cmd_decompose(const CommonArgs& args, const std::string& importance_out, int top_k) {
  const Dataset background = load_csv_file(args.background_path, HasHeader::kAuto);
  const auto eval = std::make_shared<const Dataset>(load_eval(args.eval_path));
  const auto model = std::make_shared<const TreeEnsemble>(load_model_for(args, background));

  Decomposition dec;
  if (args.method == "fastpd") {
    const EnsembleAugmentation aug = augment_with_cache(model, background, args);
    dec = decompose(aug, eval, {.threads = args.threads});
  } else if (args.method == "vanilla") {
    dec = decompose_vanilla(*model, background, eval);
  } else if (args.method == "path") {
    dec = decompose_path(*model, background, eval);
  } else {
    throw ValidationError("unknown method '" + args.method + "'");
  }

  const FeatureNamer namer = namer_from(background);
  if (args.out_path.empty()) {
    write_decomposition_csv(std::cout, dec, namer, args.max_order);
  } else if (wants_json(args.out_path)) {
    auto out = open_out(args.out_path);
    write_decomposition_json(out, dec, namer, args.max_order);
  } else {
    auto out = open_out(args.out_path);
    write_decomposition_csv(out, dec, namer, args.max_order);
  }

  const auto imp = importance(dec);
  if (!importance_out.empty()) {
    auto out = open_out(importance_out);
    write_importance_csv(out, imp, namer);
  }
  std::ostringstream summary;
  summary << "intercept " << format_double(dec.intercept) << ", " << dec.components.size()
          << " components over " << eval->n() << " rows; top components:\n";
  for (std::size_t i = 0; i < imp.size() && i < static_cast<std::size_t>(top_k); ++i)
    summary << "  " << subset_label(imp[i].first, namer) << " " << format_double(imp[i].second)
            << "\n";
  std::cerr << summary.str();
  return kExitOk;
}

int cmd_shap(const CommonArgs& args) {
  const Dataset background = load_csv_file(args.background_path, HasHeader::kAuto);
  const auto eval = std::make_shared<const Dataset>(load_eval(args.eval_path));
  const auto model = std::make_shared<const TreeEnsemble>(load_model_for(args, background));

  ShapMatrix shap;
  if (args.method == "fastpd") {
    const EnsembleAugmentation aug = augment_with_cache(model, background, args);
    shap = shap_from_decomposition(decompose(aug, eval, {.threads = args.threads}));
  } else if (args.method == "vanilla" || args.method == "path") {
    shap.n = eval->n();
    shap.d = eval->d();
    shap.values.assign(shap.n * shap.d, 0.0);
    for (std::size_t r = 0; r < eval->n(); ++r) {
      const ShapValues row = args.method == "vanilla"
                                 ? vanilla_shap(*model, background, eval->row(r))
                                 : path_dependent_shap(*model, background, eval->row(r));
      shap.baseline = row.baseline;
      for (std::size_t k = 0; k < shap.d; ++k) shap.at(r, k) = row.phi[k];
    }
  } else {
    throw ValidationError("unknown method '" + args.method + "'");
  }

  const FeatureNamer namer = namer_from(background);
  if (args.out_path.empty()) {
    write_shap_csv(std::cout, shap, namer);
  } else if (wants_json(args.out_path)) {
    auto out = open_out(args.out_path);
    write_shap_json(out, shap, namer);
  } else {
    auto out = open_out(args.out_path);
    write_shap_csv(out, shap, namer);
  }
  return kExitOk;
}

int cmd_pdplot(const CommonArgs& args, const std::string& feature_spec, int grid) {
  const Dataset background = load_csv_file(args.background_path, HasHeader::kAuto);
  const auto model = std::make_shared<const TreeEnsemble>(load_model_for(args, background));
  const int feature = resolve_feature(feature_spec, background);
  const auto f = static_cast<std::size_t>(feature);

  Dataset eval;
  if (!args.eval_path.empty()) {
    eval = load_eval(args.eval_path);
    if (eval.d() != background.d())
      throw ValidationError("evaluation points and background differ in width");
  } else {
    if (grid < 1) throw ValidationError("grid must have at least one point");
    double lo = background.at(0, f), hi = background.at(0, f);
    for (std::size_t i = 1; i < background.n(); ++i) {
      lo = std::min(lo, background.at(i, f));
      hi = std::max(hi, background.at(i, f));
    }
    // v_k depends on coordinate k alone; off coordinates are placeholders.
    eval = Dataset(static_cast<std::size_t>(grid), background.d());
    for (int i = 0; i < grid; ++i)
      eval.at(static_cast<std::size_t>(i), f) =
          grid == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (grid - 1);
  }

  const FeatureSubset s = FeatureSubset::single(feature);
  std::vector<PdPlotPoint> points(eval.n());
  if (args.method == "fastpd") {
    const EnsembleAugmentation aug = augment_with_cache(model, background, args);
    const PdMatrix m = pd_evaluate_ensemble(aug, eval, {s}, args.threads);
    for (std::size_t r = 0; r < eval.n(); ++r) points[r] = {eval.at(r, f), m.at(r, 0)};
  } else if (args.method == "vanilla") {
    for (std::size_t r = 0; r < eval.n(); ++r)
      points[r] = {eval.at(r, f), vanilla_pd(*model, background, eval.row(r), s)};
  } else if (args.method == "path") {
    const CoverageCounts coverage = compute_coverage(*model, background);
    for (std::size_t r = 0; r < eval.n(); ++r)
      points[r] = {eval.at(r, f), path_dependent_pd_ensemble(*model, coverage, eval.row(r), s)};
  } else {
    throw ValidationError("unknown method '" + args.method + "'");
  }
  std::sort(points.begin(), points.end(),
            [](const PdPlotPoint& a, const PdPlotPoint& b) { return a.x < b.x; });

  const std::string name = background.column_name(f);
  if (args.out_path.empty()) {
    write_pd_plot_csv(std::cout, points, name);
  } else {
    auto out = open_out(args.out_path);
    write_pd_plot_csv(out, points, name);
  }
  return kExitOk;
}

int cmd_bench(const CommonArgs& args, const std::vector<std::size_t>& sizes,
              const std::vector<std::string>& methods, int repeats, double data_sd,
              int workload) {
  const TreeEnsemble model =
      parse_model_file(args.model_path, model_format_from_string(args.format), args.base_score);
  const auto rows =
      run_bench(model, sizes, methods, repeats, args.seed, args.threads, data_sd, workload);
  std::ostringstream csv;
  csv << "method,n,seconds\n";
  for (const BenchResult& row : rows) {
    csv << row.method << ',' << row.n << ',';
    if (row.ok)
      csv << format_double(row.seconds);
    else
      csv << "NA";
    csv << '\n';
  }
  if (args.out_path.empty()) {
    std::cout << csv.str();
  } else {
    auto out = open_out(args.out_path);
    out << csv.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial-dependence explanations for tree ensembles"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* decompose_cmd =
      app.add_subcommand("decompose", "Functional decomposition with component importances");
  add_model_flags(decompose_cmd, args);
  decompose_cmd->add_option("--background", args.background_path, "Background sample CSV")
      ->required();
  decompose_cmd->add_option("--eval", args.eval_path, "Evaluation points CSV")->required();
  decompose_cmd->add_option("--method", args.method, "fastpd | vanilla | path");
  decompose_cmd->add_option("--max-order", args.max_order,
                            "Write only components with at most this many features");
  decompose_cmd->add_option("--aug-cache", args.aug_cache_path,
                            "Augmentation snapshot to reuse (created when absent)");
  std::string importance_out;
  int top_k = 10;
  decompose_cmd->add_option("--importance-out", importance_out, "Write the importance table here");
  decompose_cmd->add_option("--top", top_k, "Top components in the summary");

  auto* shap_cmd = app.add_subcommand("shap", "Per-feature attribution matrix");
  add_model_flags(shap_cmd, args);
  shap_cmd->add_option("--background", args.background_path, "Background sample CSV")->required();
  shap_cmd->add_option("--eval", args.eval_path, "Evaluation points CSV")->required();
  shap_cmd->add_option("--method", args.method, "fastpd | vanilla | path");
  shap_cmd->add_option("--aug-cache", args.aug_cache_path,
                       "Augmentation snapshot to reuse (created when absent)");

  auto* pdplot_cmd = app.add_subcommand("pdplot", "One-dimensional PD table for a feature");
  add_model_flags(pdplot_cmd, args);
  pdplot_cmd->add_option("--background", args.background_path, "Background sample CSV")
      ->required();
  pdplot_cmd->add_option("--eval", args.eval_path, "Evaluate at these rows instead of a grid");
  std::string feature_spec;
  int grid = 50;
  pdplot_cmd->add_option("--feature", feature_spec, "Feature name or index")->required();
  pdplot_cmd->add_option("--grid", grid, "Uniform grid size over the background range");
  pdplot_cmd->add_option("--method", args.method, "fastpd | vanilla | path");
  pdplot_cmd->add_option("--aug-cache", args.aug_cache_path,
                         "Augmentation snapshot to reuse (created when absent)");

  auto* bench_cmd = app.add_subcommand("bench", "Wall-clock scaling table (n_b = n_e = n)");
  add_model_flags(bench_cmd, args);
  std::vector<std::size_t> sizes;
  std::vector<std::string> methods{"fastpd", "vanilla"};
  int repeats = 3;
  double data_sd = 1.0;
  int workload = -1;
  bench_cmd->add_option("--sizes", sizes, "Ascending sample sizes")->required()->delimiter(',');
  bench_cmd->add_option("--methods", methods, "Any of fastpd, vanilla, path")->delimiter(',');
  bench_cmd->add_option("--repeats", repeats, "Repeats per cell (median is reported)");
  bench_cmd->add_option("--data-sd", data_sd, "Std. dev. of the synthetic benchmark columns");
  bench_cmd->add_option("--workload", workload,
                        "Singleton subsets in the workload besides the empty set (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  try {
    if (decompose_cmd->parsed()) return cmd_decompose(args, importance_out, top_k);
    if (shap_cmd->parsed()) return cmd_shap(args);
    if (pdplot_cmd->parsed()) return cmd_pdplot(args, feature_spec, grid);
    if (bench_cmd->parsed()) return cmd_bench(args, sizes, methods, repeats, data_sd, workload);
  } catch (const BudgetError& e) {
    std::cerr << "fastpd: " << e.what() << "\n";
    return kExitBudget;
  } catch (const ValidationError& e) {
    std::cerr << "fastpd: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "fastpd: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
