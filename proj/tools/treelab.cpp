#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "treelab/dataset.hpp"
#include "treelab/diagnostics.hpp"
#include "treelab/error.hpp"
#include "treelab/evaluation.hpp"
#include "treelab/synthgen.hpp"
#include "treelab/tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace treelab;

namespace {

// Every key accepted in a --config file; unknown keys are rejected so typos
// cannot silently fall back to defaults.
const std::set<std::string> kConfigKeys = {
    "output-dir", "theta", "rho", "epsilon", "n", "seed", "out", "input",
    "label-column", "binarize", "data", "family", "max-depth", "criterion",
    "model", "z-score", "datasets", "results", "depths", "families", "runs",
    "jobs", "test-fraction", "thetas", "rhos", "epsilons", "replicates",
    "aggregates", "out-prefix", "sample-cap", "win-margins", "depth", "split",
    "metric", "group-by", "zero-centered", "ridge-lambda", "lasso-lambda",
    "enet-lambda", "enet-mixing", "svm-cost", "max-iterations", "tolerance",
    "solver-seed",
};

class ConfigLayer {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("config file not found: " + path);
    try {
      cfg_ = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + path + ": " + e.what());
    }
    if (!cfg_.is_object())
      throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : cfg_.items())
      if (!kConfigKeys.count(key))
        throw ConfigError("config file: unknown key '" + key + "'");
  }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!cfg_.contains(key)) return fallback;
    try {
      return cfg_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config file: bad value for '" + key + "'");
    }
  }

 private:
  json cfg_ = json::object();
};

struct SolverFlags {
  double ridge_lambda = 1.0;
  double lasso_lambda = 0.01;
  double enet_lambda = 0.01;
  double enet_mixing = 0.5;
  double svm_cost = 1.0;
  int max_iterations = 10000;
  double tolerance = 1e-6;
  std::uint64_t solver_seed = 0;

  void attach(CLI::App* cmd, const ConfigLayer& cfg) {
    ridge_lambda = cfg.get("ridge-lambda", ridge_lambda);
    lasso_lambda = cfg.get("lasso-lambda", lasso_lambda);
    enet_lambda = cfg.get("enet-lambda", enet_lambda);
    enet_mixing = cfg.get("enet-mixing", enet_mixing);
    svm_cost = cfg.get("svm-cost", svm_cost);
    max_iterations = cfg.get("max-iterations", max_iterations);
    tolerance = cfg.get("tolerance", tolerance);
    solver_seed = cfg.get("solver-seed", solver_seed);
    cmd->add_option("--ridge-lambda", ridge_lambda,
                    "Ridge regularization strength")
        ->capture_default_str();
    cmd->add_option("--lasso-lambda", lasso_lambda,
                    "Lasso regularization strength")
        ->capture_default_str();
    cmd->add_option("--enet-lambda", enet_lambda,
                    "Elastic net regularization strength")
        ->capture_default_str();
    cmd->add_option("--enet-mixing", enet_mixing,
                    "Elastic net L1 share in [0,1]")
        ->capture_default_str();
    cmd->add_option("--svm-cost", svm_cost, "SVM cost parameter C")
        ->capture_default_str();
    cmd->add_option("--max-iterations", max_iterations,
                    "Iteration cap for iterative solvers")
        ->capture_default_str();
    cmd->add_option("--tolerance", tolerance,
                    "Convergence tolerance for iterative solvers")
        ->capture_default_str();
    cmd->add_option("--solver-seed", solver_seed,
                    "Extra seed folded into stochastic solvers")
        ->capture_default_str();
  }

  SolverConfig to_config() const {
    SolverConfig s;
    s.ridge_lambda = ridge_lambda;
    s.lasso_lambda = lasso_lambda;
    s.enet_lambda = enet_lambda;
    s.enet_mixing = enet_mixing;
    s.svm_cost = svm_cost;
    s.max_iterations = max_iterations;
    s.tolerance = tolerance;
    s.seed = solver_seed;
    s.validate();
    return s;
  }

  json to_json() const {
    return json{{"ridge-lambda", ridge_lambda},
                {"lasso-lambda", lasso_lambda},
                {"enet-lambda", enet_lambda},
                {"enet-mixing", enet_mixing},
                {"svm-cost", svm_cost},
                {"max-iterations", max_iterations},
                {"tolerance", tolerance},
                {"solver-seed", solver_seed}};
  }
};

fs::path resolve_out(const fs::path& output_dir, const std::string& given,
                     const std::string& fallback_name) {
  if (!given.empty()) return given;
  return output_dir / fallback_name;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("write failure on " + path.string());
}

void echo_config(const fs::path& output_dir, const std::string& command,
                 json effective) {
  effective["command"] = command;
  fs::create_directories(output_dir);
  write_text(output_dir / (command + "_config.json"), effective.dump(2) + "\n");
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

Dataset load_csv_dataset(const std::string& path,
                         const std::string& label_column) {
  if (!fs::exists(path)) throw DataError("dataset file not found: " + path);
  std::vector<std::string> warnings;
  Dataset d = read_csv(path, label_column, &warnings);
  print_warnings(warnings);
  return d;
}

ImpurityKind parse_criterion(const std::string& name) {
  if (name == "gini") return ImpurityKind::Gini;
  if (name == "entropy") return ImpurityKind::ShannonEntropy;
  throw ConfigError("unknown criterion '" + name + "' (gini or entropy)");
}

std::vector<TreeFamily> parse_families(const std::vector<std::string>& names) {
  std::vector<TreeFamily> families;
  for (const auto& name : names) {
    const auto family = tree_family_from_name(name);
    if (!family) throw ConfigError("unknown family '" + name + "'");
    families.push_back(*family);
  }
  if (families.empty()) throw ConfigError("no families selected");
  return families;
}

// NaN metric values dump as JSON null.
json metrics_to_json(const evaluation::MetricsRecord& r) {
  return json{{"dataset", r.dataset},
              {"family", tree_family_name(r.family)},
              {"seed", r.seed},
              {"depth", r.depth},
              {"split", r.split},
              {"acc", r.acc},
              {"f1", r.f1},
              {"auc", r.auc},
              {"ap", r.ap},
              {"tree_size", r.tree_size},
              {"nonzero_ratio", r.nonzero_ratio}};
}

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Short form for values that name things (file suffixes, column headers).
std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// ---------- synth generate ----------

int cmd_synth_generate(const fs::path& output_dir, const SyntheticSpec& spec,
                       const std::string& out) {
  spec.validate();
  const Dataset d = generate(spec);
  const fs::path csv_path =
      resolve_out(output_dir, out, spec.dataset_name() + ".csv");
  if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
  write_csv(d, csv_path.string());
  echo_config(output_dir, "synth_generate",
              json{{"theta", spec.theta_deg},
                   {"rho", spec.rho},
                   {"epsilon", spec.epsilon},
                   {"n", spec.n},
                   {"seed", spec.seed},
                   {"out", csv_path.string()}});
  std::cout << "wrote " << csv_path.string() << " (" << d.n_rows()
            << " rows)\n";
  return 0;
}

// ---------- data prepare ----------

int cmd_data_prepare(const fs::path& output_dir, const std::string& input,
                     const std::string& label_column, const std::string& out,
                     bool binarize) {
  Dataset d = load_csv_dataset(input, label_column);
  std::vector<std::string> warnings;
  if (binarize) d = binarize_majority_vs_rest(d, &warnings);
  d = z_score_normalize(d, &warnings);
  print_warnings(warnings);
  const fs::path csv_path = resolve_out(
      output_dir, out, fs::path(input).stem().string() + "_prepared.csv");
  if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
  write_csv(d, csv_path.string(), label_column);
  echo_config(output_dir, "data_prepare",
              json{{"input", input},
                   {"label-column", label_column},
                   {"binarize", binarize},
                   {"out", csv_path.string()}});
  std::cout << "wrote " << csv_path.string() << " (" << d.n_rows() << " rows, "
            << d.n_features() << " features, " << d.n_classes()
            << " classes)\n";
  return 0;
}

// ---------- train ----------

int cmd_train(const fs::path& output_dir, const std::string& data,
              const std::string& label_column, const std::string& family_name,
              int max_depth, const std::string& criterion, bool z_score,
              std::uint64_t seed, const SolverFlags& solver,
              const std::string& model_out) {
  const auto family = tree_family_from_name(family_name);
  if (!family) throw ConfigError("unknown family '" + family_name + "'");

  Dataset d = load_csv_dataset(data, label_column);
  if (z_score) d = z_score_normalize(d);

  GrowthConfig growth;
  growth.family = *family;
  growth.max_depth = max_depth;
  growth.univariate_criterion = parse_criterion(criterion);
  growth.solver = solver.to_config();
  growth.seed = seed;
  const DecisionTree tree = DecisionTree::fit(d, growth);

  const fs::path model_path = resolve_out(output_dir, model_out, "model.json");
  if (model_path.has_parent_path())
    fs::create_directories(model_path.parent_path());
  tree.save(model_path);
  echo_config(output_dir, "train",
              json{{"data", data},
                   {"label-column", label_column},
                   {"family", family_name},
                   {"max-depth", max_depth},
                   {"criterion", criterion},
                   {"z-score", z_score},
                   {"seed", seed},
                   {"model", model_path.string()},
                   {"solver", solver.to_json()}});

  const auto pred = tree.predict(d.features);
  std::cout << "wrote " << model_path.string() << " (size "
            << tree.tree_size() << ", depth " << tree.depth()
            << ", training accuracy "
            << format_g(evaluation::accuracy(d.labels, pred)) << ")\n";
  return 0;
}

// ---------- evaluate (single model) ----------

int cmd_evaluate_model(const fs::path& output_dir, const std::string& model,
                       const std::string& data,
                       const std::string& label_column, bool z_score,
                       const std::string& out) {
  if (!fs::exists(model)) throw DataError("model file not found: " + model);
  const DecisionTree tree = DecisionTree::load(model);
  Dataset d = load_csv_dataset(data, label_column);
  if (z_score) d = z_score_normalize(d);
  if (d.n_classes() != tree.n_classes())
    throw DataError("model expects " + std::to_string(tree.n_classes()) +
                    " classes, dataset has " + std::to_string(d.n_classes()));

  evaluation::MetricsRecord r;
  const int positive = evaluation::positive_class_of(d);
  const auto pred = tree.predict(d.features);
  r.dataset = d.name;
  r.family = tree.family();
  r.depth = tree.max_depth();
  r.split = "full";
  r.acc = evaluation::accuracy(d.labels, pred);
  if (positive >= 0) {
    r.f1 = evaluation::f1_score(d.labels, pred, positive);
    std::vector<double> scores(static_cast<std::size_t>(d.n_rows()));
    for (Eigen::Index i = 0; i < d.n_rows(); ++i)
      scores[static_cast<std::size_t>(i)] =
          tree.predict_proba(d.features.row(i))
              .p[static_cast<std::size_t>(positive)];
    try {
      r.auc = evaluation::auc_roc(d.labels, scores, positive);
    } catch (const MathError&) {
      r.auc = std::numeric_limits<double>::quiet_NaN();
    }
    try {
      r.ap = evaluation::average_precision(d.labels, scores, positive);
    } catch (const MathError&) {
      r.ap = std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    r.f1 = evaluation::f1_macro(d.labels, pred, d.n_classes());
    r.auc = std::numeric_limits<double>::quiet_NaN();
    r.ap = std::numeric_limits<double>::quiet_NaN();
  }
  r.tree_size = tree.tree_size();
  try {
    r.nonzero_ratio = tree.nonzero_ratio();
  } catch (const MathError&) {
    r.nonzero_ratio = std::numeric_limits<double>::quiet_NaN();
  }

  json summary = metrics_to_json(r);
  summary["positive_class"] =
      positive >= 0 ? json(d.class_names[static_cast<std::size_t>(positive)])
                    : json();
  const fs::path out_path = resolve_out(output_dir, out, "metrics.json");
  write_text(out_path, summary.dump(2) + "\n");
  echo_config(output_dir, "evaluate",
              json{{"model", model},
                   {"data", data},
                   {"label-column", label_column},
                   {"z-score", z_score},
                   {"out", out_path.string()}});
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---------- evaluate (dataset batch) ----------

int cmd_evaluate_batch(const fs::path& output_dir,
                       const std::vector<std::string>& dataset_paths,
                       const std::string& label_column,
                       const std::vector<std::string>& family_names,
                       const std::vector<int>& depths, int runs, int jobs,
                       double test_fraction, std::uint64_t seed,
                       const std::string& criterion, bool z_score,
                       bool binarize, const SolverFlags& solver,
                       const std::string& results_out) {
  std::vector<Dataset> datasets;
  for (const auto& path : dataset_paths) {
    Dataset d = load_csv_dataset(path, label_column);
    if (binarize) d = binarize_majority_vs_rest(d);
    datasets.push_back(std::move(d));
  }

  evaluation::ExperimentConfig cfg;
  cfg.families = parse_families(family_names);
  cfg.depths = depths;
  cfg.growth.univariate_criterion = parse_criterion(criterion);
  cfg.growth.solver = solver.to_config();
  cfg.runs = runs;
  cfg.jobs = jobs;
  cfg.test_fraction = test_fraction;
  cfg.seed = seed;
  cfg.z_score = z_score;

  const fs::path results_path =
      resolve_out(output_dir, results_out, "results.csv");
  if (results_path.has_parent_path())
    fs::create_directories(results_path.parent_path());
  echo_config(output_dir, "evaluate_batch",
              json{{"datasets", dataset_paths},
                   {"label-column", label_column},
                   {"families", family_names},
                   {"depths", depths},
                   {"runs", runs},
                   {"jobs", jobs},
                   {"test-fraction", test_fraction},
                   {"seed", seed},
                   {"criterion", criterion},
                   {"z-score", z_score},
                   {"binarize", binarize},
                   {"results", results_path.string()},
                   {"solver", solver.to_json()}});
  const auto summary = evaluation::run_on_datasets(datasets, cfg, results_path);
  for (const auto& f : summary.failures) std::cerr << "failed: " << f << '\n';
  std::cout << "cells total " << summary.cells_total << ", done "
            << summary.cells_done << ", skipped " << summary.cells_skipped
            << ", failed " << summary.cells_failed << "; results in "
            << results_path.string() << '\n';
  return 0;
}

// ---------- sweep ----------

int cmd_sweep(const fs::path& output_dir, const GridSpec& grid_spec,
              const std::vector<std::string>& family_names,
              const std::vector<int>& depths, int jobs, double test_fraction,
              std::uint64_t seed, const std::string& criterion,
              const SolverFlags& solver, const std::string& results_out,
              const std::string& aggregates_out) {
  evaluation::ExperimentConfig cfg;
  cfg.families = parse_families(family_names);
  cfg.depths = depths;
  cfg.growth.univariate_criterion = parse_criterion(criterion);
  cfg.growth.solver = solver.to_config();
  cfg.jobs = jobs;
  cfg.test_fraction = test_fraction;
  cfg.seed = seed;
  GridSpec grid = grid_spec;
  grid.master_seed = seed;

  const fs::path results_path =
      resolve_out(output_dir, results_out, "results.csv");
  const fs::path aggregates_path =
      resolve_out(output_dir, aggregates_out, "aggregates.csv");
  if (results_path.has_parent_path())
    fs::create_directories(results_path.parent_path());
  echo_config(output_dir, "sweep",
              json{{"thetas", grid.thetas},
                   {"rhos", grid.rhos},
                   {"epsilons", grid.epsilons},
                   {"n", grid.n},
                   {"replicates", grid.replicates},
                   {"families", family_names},
                   {"depths", depths},
                   {"jobs", jobs},
                   {"test-fraction", test_fraction},
                   {"seed", seed},
                   {"criterion", criterion},
                   {"results", results_path.string()},
                   {"aggregates", aggregates_path.string()},
                   {"solver", solver.to_json()}});

  const auto summary = evaluation::run_synthetic_sweep(grid, cfg, results_path);
  for (const auto& f : summary.failures) std::cerr << "failed: " << f << '\n';

  const auto records = evaluation::read_results_csv(results_path);
  const auto rows = evaluation::aggregate_synthetic(records);
  write_text(aggregates_path, evaluation::aggregates_csv(rows));

  std::cout << "cells total " << summary.cells_total << ", done "
            << summary.cells_done << ", skipped " << summary.cells_skipped
            << ", failed " << summary.cells_failed << "; results in "
            << results_path.string() << ", aggregates in "
            << aggregates_path.string() << '\n';
  return 0;
}

// ---------- diagnose ----------

std::vector<Dataset> load_many(const std::vector<std::string>& paths,
                               const std::string& label_column) {
  if (paths.empty()) throw ConfigError("no datasets given");
  std::vector<Dataset> datasets;
  for (const auto& path : paths)
    datasets.push_back(load_csv_dataset(path, label_column));
  return datasets;
}

void write_cdf_csv(const fs::path& path, const diagnostics::Cdf& cdf) {
  std::string text = "x,F\n";
  for (std::size_t i = 0; i < cdf.xs.size(); ++i)
    text += format_g(cdf.xs[i]) + std::string(",") + format_g(cdf.fs[i]) + "\n";
  write_text(path, text);
}

int cmd_diagnose_correlation(const fs::path& output_dir,
                             const std::vector<std::string>& dataset_paths,
                             const std::string& label_column,
                             const std::string& out_prefix,
                             std::size_t sample_cap, std::uint64_t seed) {
  const auto datasets = load_many(dataset_paths, label_column);
  diagnostics::WinTestConfig cfg;
  cfg.sample_cap = sample_cap;
  cfg.seed = seed;
  const auto report = diagnostics::build_bias_report(datasets, cfg, false);

  const std::string prefix =
      out_prefix.empty() ? (output_dir / "correlation").string() : out_prefix;
  echo_config(output_dir, "diagnose_correlation",
              json{{"datasets", dataset_paths},
                   {"label-column", label_column},
                   {"out-prefix", prefix},
                   {"sample-cap", sample_cap},
                   {"seed", seed}});

  std::string pairs_csv = "dataset,i,j,pearson,spearman,kendall\n";
  for (const auto& d : report.datasets)
    for (std::size_t k = 0; k < d.corr_pairs.size(); ++k)
      pairs_csv += d.name + "," + std::to_string(d.corr_pairs[k][0]) + "," +
                   std::to_string(d.corr_pairs[k][1]) + "," +
                   format_g(d.correlations[k].pearson) + "," +
                   format_g(d.correlations[k].spearman) + "," +
                   format_g(d.correlations[k].kendall) + "\n";
  write_text(prefix + "_pairs.csv", pairs_csv);

  const std::pair<diagnostics::CorrelationKind, const char*> kinds[] = {
      {diagnostics::CorrelationKind::Pearson, "pearson"},
      {diagnostics::CorrelationKind::Spearman, "spearman"},
      {diagnostics::CorrelationKind::Kendall, "kendall"},
  };
  for (const auto& [kind, name] : kinds) {
    const auto cdfs = diagnostics::correlation_cdf(datasets, kind);
    write_cdf_csv(prefix + "_cdf_pair_" + name + ".csv", cdfs.pair_level);
    write_cdf_csv(prefix + "_cdf_dataset_" + name + ".csv",
                  cdfs.dataset_level);
  }
  write_text(prefix + "_summary.json",
             diagnostics::bias_report_to_json(report) + "\n");
  std::cout << "wrote " << prefix << "_pairs.csv and CDF/summary files\n";
  return 0;
}

int cmd_diagnose_obliqueness(const fs::path& output_dir,
                             const std::vector<std::string>& dataset_paths,
                             const std::string& label_column,
                             const std::string& out_prefix,
                             std::size_t sample_cap, std::uint64_t seed,
                             const std::vector<double>& win_margins,
                             const SolverFlags& solver) {
  const auto datasets = load_many(dataset_paths, label_column);
  diagnostics::WinTestConfig cfg;
  cfg.solver = solver.to_config();
  cfg.sample_cap = sample_cap;
  cfg.seed = seed;
  if (win_margins.empty()) throw ConfigError("no win margins given");
  const auto report =
      diagnostics::build_bias_report(datasets, cfg, true, win_margins);

  const std::string prefix =
      out_prefix.empty() ? (output_dir / "obliqueness").string() : out_prefix;
  echo_config(output_dir, "diagnose_obliqueness",
              json{{"datasets", dataset_paths},
                   {"label-column", label_column},
                   {"out-prefix", prefix},
                   {"sample-cap", sample_cap},
                   {"seed", seed},
                   {"win-margins", win_margins},
                   {"solver", solver.to_json()}});

  std::string header = "dataset,i,j,pearson,spearman,kendall,acc_i,acc_j,"
                       "acc_both";
  for (double margin : win_margins)
    header += ",win_at_" + format_short(margin);
  header += ",theta_hat_deg,phi_hat_deg\n";
  std::string pairs_csv = header;
  for (const auto& d : report.datasets) {
    std::map<std::pair<int, int>, const diagnostics::CorrelationTriple*>
        corr_by_pair;
    for (std::size_t k = 0; k < d.corr_pairs.size(); ++k)
      corr_by_pair[{d.corr_pairs[k][0], d.corr_pairs[k][1]}] =
          &d.correlations[k];
    for (const auto& r : d.pairs) {
      pairs_csv += d.name + "," + std::to_string(r.i) + "," +
                   std::to_string(r.j);
      const auto it = corr_by_pair.find({r.i, r.j});
      for (int c = 0; c < 3; ++c) {
        const double v =
            it == corr_by_pair.end()
                ? std::numeric_limits<double>::quiet_NaN()
                : (c == 0   ? it->second->pearson
                   : c == 1 ? it->second->spearman
                            : it->second->kendall);
        pairs_csv += std::string(",") + format_g(v);
      }
      pairs_csv += std::string(",") + format_g(r.acc_i) + "," +
                   format_g(r.acc_j) + "," + format_g(r.acc_both);
      for (double margin : win_margins)
        pairs_csv += r.wins(margin) ? ",1" : ",0";
      pairs_csv += std::string(",") + format_g(r.theta_hat_deg) + "," +
                   format_g(r.phi_hat_deg) + "\n";
    }
  }
  write_text(prefix + "_pairs.csv", pairs_csv);

  for (std::size_t k = 0; k < report.curves.size(); ++k) {
    std::string text = "phi_deg,cumulative\n";
    const auto& curve = report.curves[k];
    for (std::size_t t = 0; t < curve.phi_deg.size(); ++t)
      text += format_g(curve.phi_deg[t]) + std::string(",") +
              format_g(curve.cumulative[t]) + "\n";
    write_text(prefix + "_win_curve_" + format_short(report.win_margins[k]) +
                   ".csv",
               text);
  }
  write_text(prefix + "_summary.json",
             diagnostics::bias_report_to_json(report) + "\n");
  std::cout << "wrote " << prefix << "_pairs.csv, win curves and summary\n";
  return 0;
}

// ---------- report ----------

int cmd_report_ttest(const fs::path& output_dir, const std::string& results,
                     int depth, const std::string& split,
                     const std::string& metric, const std::string& group_by,
                     std::optional<double> epsilon_filter,
                     const std::string& out) {
  if (!fs::exists(results))
    throw DataError("results file not found: " + results);
  auto records = evaluation::read_results_csv(results);
  if (epsilon_filter) {
    std::vector<evaluation::MetricsRecord> kept;
    for (auto& r : records) {
      const auto spec = parse_dataset_name(r.dataset);
      if (spec && spec->epsilon == *epsilon_filter)
        kept.push_back(std::move(r));
    }
    records = std::move(kept);
  }

  std::map<std::string, std::vector<evaluation::MetricsRecord>> grouped;
  if (group_by == "theta") {
    for (auto& r : records) {
      const auto spec = parse_dataset_name(r.dataset);
      if (!spec) continue;
      grouped[format_short(spec->theta_deg)].push_back(std::move(r));
    }
  } else if (group_by == "none") {
    grouped["all"] = std::move(records);
  } else {
    throw ConfigError("unknown group-by '" + group_by +
                      "' (none or theta)");
  }

  std::string csv = (group_by == "theta" ? "theta" : std::string("group")) +
                    ",metric,n_pairs,mean_diff,t_stat,p_value\n";
  for (const auto& [group, group_records] : grouped) {
    const auto comparisons =
        evaluation::compare_families(group_records, depth, split);
    for (const auto& cmp : comparisons) {
      if (metric != "all" && metric != cmp.metric) continue;
      csv += group + "," + cmp.metric + "," + std::to_string(cmp.n_pairs) +
             "," + format_g(cmp.mean_diff);
      if (cmp.test)
        csv += std::string(",") + format_g(cmp.test->t_stat) + "," +
               format_g(cmp.test->p_value);
      else
        csv += ",nan,nan";
      csv += "\n";
    }
  }
  const fs::path out_path = resolve_out(output_dir, out, "ttest.csv");
  write_text(out_path, csv);
  echo_config(output_dir, "report_ttest",
              json{{"results", results},
                   {"depth", depth},
                   {"split", split},
                   {"metric", metric},
                   {"group-by", group_by},
                   {"epsilon", epsilon_filter ? json(*epsilon_filter) : json()},
                   {"out", out_path.string()}});
  std::cout << csv;
  return 0;
}

int cmd_report_groups(const fs::path& output_dir, const std::string& results,
                      int depth, const std::string& split, bool zero_centered,
                      const std::string& out) {
  if (!fs::exists(results))
    throw DataError("results file not found: " + results);
  const auto records = evaluation::read_results_csv(results);
  const auto summary =
      evaluation::group_datasets(records, depth, split, zero_centered);

  std::string csv = "dataset,f1_gap,label\n";
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < summary.dataset.size(); ++i) {
    const char* label = evaluation::group_label_name(summary.label[i]);
    csv += summary.dataset[i] + "," + format_g(summary.gap[i]) + "," + label +
           "\n";
    ++counts[label];
  }
  const fs::path out_path = resolve_out(output_dir, out, "groups.csv");
  write_text(out_path, csv);

  double mean = 0.0;
  for (double g : summary.gap) mean += g;
  if (!summary.gap.empty()) mean /= static_cast<double>(summary.gap.size());
  double ss = 0.0;
  for (double g : summary.gap) ss += (g - mean) * (g - mean);
  const double sigma =
      summary.gap.size() > 1
          ? std::sqrt(ss / static_cast<double>(summary.gap.size() - 1))
          : 0.0;
  json jsum{{"n_datasets", summary.dataset.size()},
            {"mean_gap", mean},
            {"stdev_gap", sigma},
            {"zero-centered", zero_centered},
            {"counts", counts}};
  write_text(out_path.string() + ".summary.json", jsum.dump(2) + "\n");
  echo_config(output_dir, "report_groups",
              json{{"results", results},
                   {"depth", depth},
                   {"split", split},
                   {"zero-centered", zero_centered},
                   {"out", out_path.string()}});
  std::cout << csv;
  return 0;
}

void emit_error(const char* type, const std::string& message) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump()
            << '\n';
}

int run(int argc, char** argv) {
  // The config file must be read before options are registered so its
  // values become the option defaults; CLI11 only sees it as a string.
  ConfigLayer cfg;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      cfg.load(argv[i + 1]);
    else if (arg.rfind("--config=", 0) == 0)
      cfg.load(arg.substr(9));
  }

  CLI::App app{"Decision-tree laboratory: synthetic benchmarks for"
               " univariate and multivariate trees"};
  app.footer(
      "Exit codes: 0 success, 2 usage error, 3 invalid configuration,"
      " 4 data/file error, 5 internal error.\n"
      "A JSON --config file supplies defaults for any long option"
      " (key = option name without --); command-line flags win.\n"
      "TREELAB_OUTPUT_DIR sets the default --output-dir.");
  app.require_subcommand(1);
  // Let global options such as --output-dir appear after the subcommand.
  app.fallthrough(true);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file with defaults");

  const char* env_out = std::getenv("TREELAB_OUTPUT_DIR");
  std::string output_dir_str =
      cfg.get<std::string>("output-dir", env_out ? env_out : ".");
  app.add_option("--output-dir", output_dir_str,
                 "Directory for default-named outputs")
      ->capture_default_str();

  // synth generate
  auto* synth = app.add_subcommand("synth", "Synthetic data generation");
  synth->require_subcommand(1);
  auto* generate_cmd =
      synth->add_subcommand("generate", "Generate one synthetic dataset");
  SyntheticSpec spec;
  spec.theta_deg = cfg.get("theta", 0.0);
  spec.rho = cfg.get("rho", 0.0);
  spec.epsilon = cfg.get("epsilon", 0.0);
  spec.n = cfg.get("n", 1000);
  spec.seed = cfg.get<std::uint64_t>("seed", 0);
  std::string synth_out = cfg.get<std::string>("out", "");
  generate_cmd->add_option("--theta", spec.theta_deg,
                           "Boundary slope angle, degrees in [0, 90)")
      ->capture_default_str();
  generate_cmd->add_option("--rho", spec.rho,
                           "Feature correlation target in [0, 1]")
      ->capture_default_str();
  generate_cmd->add_option("--epsilon", spec.epsilon,
                           "Label flip probability in [0, 1]")
      ->capture_default_str();
  generate_cmd->add_option("--n", spec.n, "Instance count")
      ->capture_default_str();
  generate_cmd->add_option("--seed", spec.seed, "Generator seed")
      ->capture_default_str();
  generate_cmd->add_option("--out", synth_out,
                           "Output CSV path (default: <name>.csv)");

  // data prepare
  auto* data_cmd = app.add_subcommand("data", "Dataset ingestion");
  data_cmd->require_subcommand(1);
  auto* prepare_cmd = data_cmd->add_subcommand(
      "prepare", "Ingest a CSV, keep numeric columns, z-score features");
  std::string prep_input = cfg.get<std::string>("input", "");
  std::string prep_label = cfg.get<std::string>("label-column", "label");
  std::string prep_out = cfg.get<std::string>("out", "");
  bool prep_binarize = cfg.get("binarize", false);
  prepare_cmd->add_option("--input", prep_input, "Input CSV")->required();
  prepare_cmd->add_option("--label-column", prep_label, "Label column name")
      ->capture_default_str();
  prepare_cmd->add_option("--out", prep_out, "Output CSV path");
  prepare_cmd->add_flag("--binarize", prep_binarize,
                        "Reduce multiclass labels to majority vs. rest");

  // train
  auto* train_cmd = app.add_subcommand("train", "Grow a tree and save it");
  std::string train_data = cfg.get<std::string>("data", "");
  std::string train_label = cfg.get<std::string>("label-column", "label");
  std::string train_family = cfg.get<std::string>("family", "udt");
  int train_depth = cfg.get("max-depth", 16);
  std::string train_criterion = cfg.get<std::string>("criterion", "gini");
  bool train_zscore = cfg.get("z-score", true);
  std::uint64_t train_seed = cfg.get<std::uint64_t>("seed", 0);
  std::string train_model = cfg.get<std::string>("model", "");
  SolverFlags train_solver;
  train_cmd->add_option("--data", train_data, "Training CSV")->required();
  train_cmd->add_option("--label-column", train_label, "Label column name")
      ->capture_default_str();
  train_cmd
      ->add_option("--family", train_family,
                   "Tree family: udt (axis-parallel) or mdt (full pool)")
      ->capture_default_str();
  train_cmd->add_option("--max-depth", train_depth, "Depth limit")
      ->capture_default_str();
  train_cmd
      ->add_option("--criterion", train_criterion,
                   "Univariate impurity: gini or entropy")
      ->capture_default_str();
  train_cmd
      ->add_option("--z-score", train_zscore,
                   "Normalize features before growing")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_seed, "Growth seed")
      ->capture_default_str();
  train_cmd->add_option("--model", train_model, "Model JSON output path");
  train_solver.attach(train_cmd, cfg);

  // evaluate
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Score a saved model, or run the split-grow-score"
                  " experiment over dataset CSVs (--datasets)");
  std::string eval_model = cfg.get<std::string>("model", "");
  std::string eval_data = cfg.get<std::string>("data", "");
  std::string eval_label = cfg.get<std::string>("label-column", "label");
  bool eval_zscore = cfg.get("z-score", true);
  std::string eval_out = cfg.get<std::string>("out", "");
  std::vector<std::string> eval_datasets =
      cfg.get<std::vector<std::string>>("datasets", {});
  std::vector<std::string> eval_families =
      cfg.get<std::vector<std::string>>("families", {"udt", "mdt"});
  std::vector<int> eval_depths = cfg.get<std::vector<int>>("depths", {16});
  int eval_runs = cfg.get("runs", 1);
  int eval_jobs = cfg.get("jobs", 1);
  double eval_test_fraction = cfg.get("test-fraction", 0.1);
  std::uint64_t eval_seed = cfg.get<std::uint64_t>("seed", 0);
  std::string eval_criterion = cfg.get<std::string>("criterion", "gini");
  bool eval_binarize = cfg.get("binarize", false);
  std::string eval_results = cfg.get<std::string>("results", "");
  SolverFlags eval_solver;
  eval_cmd->add_option("--model", eval_model, "Model JSON (single mode)");
  eval_cmd->add_option("--data", eval_data, "Dataset CSV (single mode)");
  eval_cmd->add_option("--label-column", eval_label, "Label column name")
      ->capture_default_str();
  eval_cmd
      ->add_option("--z-score", eval_zscore,
                   "Normalize features before scoring/growing")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Metrics JSON path (single mode)");
  eval_cmd->add_option("--datasets", eval_datasets,
                       "Dataset CSVs (batch mode)")
      ->delimiter(',');
  eval_cmd->add_option("--families", eval_families, "Tree families")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--depths", eval_depths, "Depth limits")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--runs", eval_runs, "Repeated runs per dataset")
      ->capture_default_str();
  eval_cmd->add_option("--jobs", eval_jobs, "Worker threads")
      ->capture_default_str();
  eval_cmd
      ->add_option("--test-fraction", eval_test_fraction,
                   "Held-out fraction for the stratified split")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_seed, "Experiment master seed")
      ->capture_default_str();
  eval_cmd
      ->add_option("--criterion", eval_criterion,
                   "Univariate impurity: gini or entropy")
      ->capture_default_str();
  eval_cmd->add_flag("--binarize", eval_binarize,
                     "Reduce multiclass labels to majority vs. rest");
  eval_cmd->add_option("--results", eval_results,
                       "Results CSV path (batch mode)");
  eval_solver.attach(eval_cmd, cfg);

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Run the full synthetic grid into a results CSV");
  GridSpec grid_spec;
  grid_spec.thetas = cfg.get("thetas", grid_spec.thetas);
  grid_spec.rhos = cfg.get("rhos", grid_spec.rhos);
  grid_spec.epsilons = cfg.get("epsilons", grid_spec.epsilons);
  grid_spec.n = cfg.get("n", grid_spec.n);
  grid_spec.replicates = cfg.get("replicates", grid_spec.replicates);
  std::vector<std::string> sweep_families =
      cfg.get<std::vector<std::string>>("families", {"udt", "mdt"});
  std::vector<int> sweep_depths = cfg.get<std::vector<int>>("depths", {1, 16});
  int sweep_jobs = cfg.get("jobs", 1);
  double sweep_test_fraction = cfg.get("test-fraction", 0.1);
  std::uint64_t sweep_seed = cfg.get<std::uint64_t>("seed", 0);
  std::string sweep_criterion = cfg.get<std::string>("criterion", "gini");
  std::string sweep_results = cfg.get<std::string>("results", "");
  std::string sweep_aggregates = cfg.get<std::string>("aggregates", "");
  SolverFlags sweep_solver;
  sweep_cmd->add_option("--thetas", grid_spec.thetas, "Slope angles, degrees")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--rhos", grid_spec.rhos, "Correlation targets")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--epsilons", grid_spec.epsilons,
                        "Label flip probabilities")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--n", grid_spec.n, "Instances per dataset")
      ->capture_default_str();
  sweep_cmd->add_option("--replicates", grid_spec.replicates,
                        "Replicate datasets per grid cell")
      ->capture_default_str();
  sweep_cmd->add_option("--families", sweep_families, "Tree families")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--depths", sweep_depths, "Depth limits")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep_jobs, "Worker threads")
      ->capture_default_str();
  sweep_cmd
      ->add_option("--test-fraction", sweep_test_fraction,
                   "Held-out fraction for the stratified split")
      ->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_seed, "Master seed")
      ->capture_default_str();
  sweep_cmd
      ->add_option("--criterion", sweep_criterion,
                   "Univariate impurity: gini or entropy")
      ->capture_default_str();
  sweep_cmd->add_option("--results", sweep_results, "Results CSV path");
  sweep_cmd->add_option("--aggregates", sweep_aggregates,
                        "Aggregates CSV path");
  sweep_solver.attach(sweep_cmd, cfg);

  // diagnose
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Dataset bias audits");
  diagnose_cmd->require_subcommand(1);
  auto* corr_cmd = diagnose_cmd->add_subcommand(
      "correlation", "Feature correlation statistics and CDFs");
  std::vector<std::string> diag_datasets =
      cfg.get<std::vector<std::string>>("datasets", {});
  std::string diag_label = cfg.get<std::string>("label-column", "label");
  std::string diag_prefix = cfg.get<std::string>("out-prefix", "");
  std::size_t diag_cap = cfg.get<std::size_t>("sample-cap", 100000);
  std::uint64_t diag_seed = cfg.get<std::uint64_t>("seed", 0);
  corr_cmd->add_option("--datasets", diag_datasets, "Dataset CSVs")
      ->delimiter(',')
      ->required();
  corr_cmd->add_option("--label-column", diag_label, "Label column name")
      ->capture_default_str();
  corr_cmd->add_option("--out-prefix", diag_prefix, "Output path prefix");
  corr_cmd->add_option("--sample-cap", diag_cap,
                       "Feature pairs per dataset before sampling")
      ->capture_default_str();
  corr_cmd->add_option("--seed", diag_seed, "Pair sampling seed")
      ->capture_default_str();

  auto* oblique_cmd = diagnose_cmd->add_subcommand(
      "obliqueness", "Pairwise linear-classifier win test and slope angles");
  std::vector<std::string> obl_datasets =
      cfg.get<std::vector<std::string>>("datasets", {});
  std::string obl_label = cfg.get<std::string>("label-column", "label");
  std::string obl_prefix = cfg.get<std::string>("out-prefix", "");
  std::size_t obl_cap = cfg.get<std::size_t>("sample-cap", 100000);
  std::uint64_t obl_seed = cfg.get<std::uint64_t>("seed", 0);
  std::vector<double> obl_margins =
      cfg.get<std::vector<double>>("win-margins", {0.02, 0.05});
  SolverFlags obl_solver;
  oblique_cmd->add_option("--datasets", obl_datasets, "Dataset CSVs")
      ->delimiter(',')
      ->required();
  oblique_cmd->add_option("--label-column", obl_label, "Label column name")
      ->capture_default_str();
  oblique_cmd->add_option("--out-prefix", obl_prefix, "Output path prefix");
  oblique_cmd->add_option("--sample-cap", obl_cap,
                          "Feature pairs per dataset before sampling")
      ->capture_default_str();
  oblique_cmd->add_option("--seed", obl_seed, "Sampling and solver seed")
      ->capture_default_str();
  oblique_cmd->add_option("--win-margins", obl_margins,
                          "Relative accuracy margins declaring a win")
      ->delimiter(',')
      ->capture_default_str();
  obl_solver.attach(oblique_cmd, cfg);

  // report
  auto* report_cmd = app.add_subcommand("report", "Summaries of results CSVs");
  report_cmd->require_subcommand(1);
  auto* ttest_cmd = report_cmd->add_subcommand(
      "ttest", "Paired family comparison per metric");
  std::string tt_results = cfg.get<std::string>("results", "");
  int tt_depth = cfg.get("depth", 16);
  std::string tt_split = cfg.get<std::string>("split", "test");
  std::string tt_metric = cfg.get<std::string>("metric", "all");
  std::string tt_group = cfg.get<std::string>("group-by", "none");
  double tt_epsilon = cfg.get("epsilon", -1.0);
  std::string tt_out = cfg.get<std::string>("out", "");
  ttest_cmd->add_option("--results", tt_results, "Results CSV")->required();
  ttest_cmd->add_option("--depth", tt_depth, "Depth to compare")
      ->capture_default_str();
  ttest_cmd->add_option("--split", tt_split, "Split tag: train or test")
      ->capture_default_str();
  ttest_cmd
      ->add_option("--metric", tt_metric, "acc, f1, auc, ap or all")
      ->capture_default_str();
  ttest_cmd->add_option("--group-by", tt_group, "none or theta")
      ->capture_default_str();
  ttest_cmd->add_option(
      "--epsilon", tt_epsilon,
      "Keep only synthetic datasets with this noise level");
  ttest_cmd->add_option("--out", tt_out, "Output CSV path");

  auto* groups_cmd = report_cmd->add_subcommand(
      "groups", "Dataset partition by F1 gap");
  std::string gr_results = cfg.get<std::string>("results", "");
  int gr_depth = cfg.get("depth", 16);
  std::string gr_split = cfg.get<std::string>("split", "test");
  bool gr_zero = cfg.get("zero-centered", false);
  std::string gr_out = cfg.get<std::string>("out", "");
  groups_cmd->add_option("--results", gr_results, "Results CSV")->required();
  groups_cmd->add_option("--depth", gr_depth, "Depth to compare")
      ->capture_default_str();
  groups_cmd->add_option("--split", gr_split, "Split tag: train or test")
      ->capture_default_str();
  groups_cmd->add_flag("--zero-centered", gr_zero,
                       "Center the one-sigma band at zero, not the mean gap");
  groups_cmd->add_option("--out", gr_out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }

  const fs::path output_dir = output_dir_str;

  if (generate_cmd->parsed())
    return cmd_synth_generate(output_dir, spec, synth_out);
  if (prepare_cmd->parsed())
    return cmd_data_prepare(output_dir, prep_input, prep_label, prep_out,
                            prep_binarize);
  if (train_cmd->parsed())
    return cmd_train(output_dir, train_data, train_label, train_family,
                     train_depth, train_criterion, train_zscore, train_seed,
                     train_solver, train_model);
  if (eval_cmd->parsed()) {
    if (!eval_datasets.empty())
      return cmd_evaluate_batch(output_dir, eval_datasets, eval_label,
                                eval_families, eval_depths, eval_runs,
                                eval_jobs, eval_test_fraction, eval_seed,
                                eval_criterion, eval_zscore, eval_binarize,
                                eval_solver, eval_results);
    if (eval_model.empty() || eval_data.empty())
      throw ConfigError(
          "evaluate needs either --model with --data, or --datasets");
    return cmd_evaluate_model(output_dir, eval_model, eval_data, eval_label,
                              eval_zscore, eval_out);
  }
  if (sweep_cmd->parsed())
    return cmd_sweep(output_dir, grid_spec, sweep_families, sweep_depths,
                     sweep_jobs, sweep_test_fraction, sweep_seed,
                     sweep_criterion, sweep_solver, sweep_results,
                     sweep_aggregates);
  if (corr_cmd->parsed())
    return cmd_diagnose_correlation(output_dir, diag_datasets, diag_label,
                                    diag_prefix, diag_cap, diag_seed);
  if (oblique_cmd->parsed())
    return cmd_diagnose_obliqueness(output_dir, obl_datasets, obl_label,
                                    obl_prefix, obl_cap, obl_seed, obl_margins,
                                    obl_solver);
  if (ttest_cmd->parsed()) {
    std::optional<double> eps_filter;
    if (tt_epsilon >= 0.0) eps_filter = tt_epsilon;
    return cmd_report_ttest(output_dir, tt_results, tt_depth, tt_split,
                            tt_metric, tt_group, eps_filter, tt_out);
  }
  if (groups_cmd->parsed())
    return cmd_report_groups(output_dir, gr_results, gr_depth, gr_split,
                             gr_zero, gr_out);

  emit_error("usage", "no subcommand given");
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 3;
  } catch (const DataError& e) {
    emit_error("data", e.what());
    return 4;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 5;
  }
}
