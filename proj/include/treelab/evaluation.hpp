#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treelab/dataset.hpp"
#include "treelab/synthgen.hpp"
#include "treelab/tree.hpp"

namespace treelab::evaluation {

double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);
// Harmonic mean of precision and recall for `positive_class`; conventions:
// an empty denominator yields precision/recall 0, and F1 0 when both are 0.
double f1_score(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                int positive_class);
double f1_macro(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                int num_classes);
// Mann-Whitney rank formulation with tie mid-ranks. Throws MathError when
// only one class is present.
double auc_roc(const std::vector<int>& y_true,
               const std::vector<double>& scores, int positive_class);
// Mean precision-at-k over the positives of the score-descending sweep;
// score ties broken by ascending original index. Throws MathError when only
// one class is present.
double average_precision(const std::vector<int>& y_true,
                         const std::vector<double>& scores,
                         int positive_class);

struct TTestResult {
  double mean_diff = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
};

// Two-sided paired t test on a - b with n - 1 degrees of freedom. Throws
// MathError when the differences have zero variance.
TTestResult paired_t_test(const std::vector<double>& a,
                          const std::vector<double>& b);

enum class GroupLabel { MdtLeads, Comparable, UdtLeads };
const char* group_label_name(GroupLabel label);

// Partitions datasets by their F1 gap g = f1_udt - f1_mdt: one label per
// gap, out-of-band when at least one standard deviation from the band
// center (the mean gap by default, zero when `zero_centered`). A zero
// standard deviation labels everything Comparable.
std::vector<GroupLabel> group_partition(const std::vector<double>& gaps,
                                        bool zero_centered = false);

struct MetricsRecord {
  std::string dataset;
  TreeFamily family = TreeFamily::Univariate;
  std::uint64_t seed = 0;
  int depth = 0;
  std::string split;  // "train" or "test"
  double acc = 0.0;
  double f1 = 0.0;
  double auc = 0.0;  // nan when undefined
  double ap = 0.0;   // nan when undefined
  std::int64_t tree_size = 0;
  double nonzero_ratio = 0.0;  // nan for a single-leaf tree
};

std::string results_csv_header();
std::string to_csv_row(const MetricsRecord& r);
std::vector<MetricsRecord> read_results_csv(const std::filesystem::path& path);

// Positive class used for F1/AUC/AP: the class named "1" when present,
// otherwise the minority class; -1 when the dataset is not binary.
int positive_class_of(const Dataset& d);

struct ExperimentConfig {
  std::vector<TreeFamily> families{TreeFamily::Univariate,
                                   TreeFamily::Multivariate};
  std::vector<int> depths{16};
  GrowthConfig growth;  // family, max_depth and seed are set per cell
  double test_fraction = 0.1;
  int runs = 1;  // repeated runs per ingested dataset
  std::uint64_t seed = 0;
  int jobs = 1;
  bool z_score = true;

  void validate() const;  // throws ConfigError
};

// Normalizes, splits 90/10 stratified, grows one tree, and scores it on
// both partitions. `cell_seed` drives the split and growth streams and is
// family-independent, so families see identical partitions; `record_seed`
// is what the CSV reports.
std::pair<MetricsRecord, MetricsRecord> evaluate_cell(
    const Dataset& d, TreeFamily family, int depth, const ExperimentConfig& cfg,
    std::uint64_t cell_seed, std::uint64_t record_seed);

struct RunSummary {
  std::size_t cells_total = 0;
  std::size_t cells_done = 0;
  std::size_t cells_skipped = 0;
  std::size_t cells_failed = 0;
  std::vector<std::string> failures;
};

// Both runners append to `results_csv` (header added when absent), skip
// cells whose train and test rows already exist, and fill remaining cells
// with `jobs` workers; output order is fixed regardless of job count.
RunSummary run_on_datasets(const std::vector<Dataset>& datasets,
                           const ExperimentConfig& cfg,
                           const std::filesystem::path& results_csv);
RunSummary run_synthetic_sweep(const GridSpec& grid,
                               const ExperimentConfig& cfg,
                               const std::filesystem::path& results_csv);

// Per-cell aggregation of synthetic results over replicates, keyed by the
// generator coordinates parsed from the dataset name.
struct AggregateRow {
  int depth = 0;
  std::string split;
  std::string metric;
  double theta = 0.0;
  double rho = 0.0;
  double epsilon = 0.0;
  TreeFamily family = TreeFamily::Univariate;
  double mean = 0.0;
  double stdev = 0.0;
  int n = 0;
};

std::vector<AggregateRow> aggregate_synthetic(
    const std::vector<MetricsRecord>& records);
std::string aggregates_csv(const std::vector<AggregateRow>& rows);

// Family comparison over records aligned by (dataset, seed) on one split
// and depth, per metric. `test` is absent when the paired differences have
// zero variance or fewer than 2 pairs exist.
struct FamilyComparison {
  std::string metric;
  std::size_t n_pairs = 0;
  double mean_diff = 0.0;  // univariate minus multivariate
  std::optional<TTestResult> test;
};

std::vector<FamilyComparison> compare_families(
    const std::vector<MetricsRecord>& records, int depth,
    const std::string& split);

struct GroupSummary {
  std::vector<std::string> dataset;
  std::vector<double> gap;  // mean f1_udt - f1_mdt per dataset
  std::vector<GroupLabel> label;
};

GroupSummary group_datasets(const std::vector<MetricsRecord>& records,
                            int depth, const std::string& split,
                            bool zero_centered = false);

}  // namespace treelab::evaluation
