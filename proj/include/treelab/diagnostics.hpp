#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treelab/dataset.hpp"
#include "treelab/split.hpp"

namespace treelab::diagnostics {

enum class CorrelationKind { Pearson, Spearman, Kendall };

const char* correlation_kind_name(CorrelationKind kind);

// All three throw MathError when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
// Tie-corrected tau-b, computed in O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the average of their rank range.
std::vector<double> average_ranks(std::span<const double> x);

struct CorrelationTriple {
  double pearson = 0.0;
  double spearman = 0.0;
  double kendall = 0.0;
};

// Right-continuous empirical CDF over the sample it was built from.
struct Cdf {
  std::vector<double> xs;  // ascending jump points
  std::vector<double> fs;  // value at and after each jump
  std::size_t n = 0;

  double operator()(double x) const;
};

Cdf make_cdf(std::vector<double> values);

struct CorrelationCdfs {
  Cdf pair_level;     // |corr| of every valid feature pair, all datasets
  Cdf dataset_level;  // per-dataset mean of |corr|
  std::size_t skipped_pairs = 0;  // pairs with a constant feature
};

CorrelationCdfs correlation_cdf(const std::vector<Dataset>& datasets,
                                CorrelationKind kind);

// One feature pair's accuracy probe: linear classifiers on feature i alone,
// j alone, and both, each the SVM split candidate (hinge solver direction,
// impurity-optimal threshold) evaluated on its training data.
struct PairResult {
  int i = 0;
  int j = 0;
  double acc_i = 0.0;
  double acc_j = 0.0;
  double acc_both = 0.0;
  double theta_hat_deg = 0.0;
  double phi_hat_deg = 0.0;
  bool degenerate = false;  // a constant-prediction classifier; excluded

  bool wins(double win_margin) const;
};

struct WinTestConfig {
  SolverConfig solver;
  std::size_t sample_cap = 100000;  // pairs per dataset before sampling
  std::uint64_t seed = 0;
};

std::vector<std::array<int, 2>> all_feature_pairs(int n_features);
// Uniform sample without replacement when the pair count exceeds cap;
// result sorted lexicographically either way.
std::vector<std::array<int, 2>> sample_feature_pairs(int n_features,
                                                     std::size_t cap,
                                                     std::uint64_t seed);

// Requires binary labels and at least 2 features.
std::vector<PairResult> pairwise_win_test(const Dataset& d,
                                          const WinTestConfig& cfg);

// Folds a slope estimate in [-90, 90] degrees onto [0, 45]: the acute
// angle between the boundary and the nearer axis.
double slope_fold(double theta_hat_deg);

struct WinCurve {
  std::vector<double> phi_deg;     // 0, 1, ..., 45
  std::vector<double> cumulative;  // weighted win mass with phi_hat <= t
  double final_fraction = 0.0;
};

// Each winning pair weighs 1/(usable pairs of its dataset); the curve is
// averaged over datasets with at least one usable pair.
WinCurve weighted_win_curve(
    const std::vector<std::vector<PairResult>>& per_dataset,
    double win_margin);

struct BiasReport {
  struct PerDataset {
    std::string name;
    int n_features = 0;
    std::size_t pairs_total = 0;
    std::size_t pairs_evaluated = 0;
    std::size_t degenerate = 0;
    std::vector<PairResult> pairs;
    std::vector<std::array<int, 2>> corr_pairs;
    std::vector<CorrelationTriple> correlations;  // aligned with corr_pairs
    std::size_t skipped_correlations = 0;
    std::optional<CorrelationTriple> mean_abs;
  };
  std::vector<PerDataset> datasets;
  std::vector<double> win_margins;
  std::vector<WinCurve> curves;  // aligned with win_margins
};

// Runs correlations and (optionally) the pairwise win test on every dataset.
BiasReport build_bias_report(const std::vector<Dataset>& datasets,
                             const WinTestConfig& cfg, bool run_win_test,
                             std::vector<double> win_margins = {0.02, 0.05});

std::string bias_report_to_json(const BiasReport& report);

}  // namespace treelab::diagnostics
