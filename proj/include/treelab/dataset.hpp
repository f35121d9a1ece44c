#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace treelab {

// Empirical per-class relative frequencies. Entries are non-negative and
// sum to one.
struct ClassDistribution {
  std::vector<double> p;

  static ClassDistribution from_counts(const std::vector<std::int64_t>& counts);
  // Index of the largest entry; ties go to the lower class index.
  int argmax() const;
};

// Index partition induced by a split: disjoint, jointly covering the input.
struct SplitOutcome {
  std::vector<int> left;
  std::vector<int> right;
};

// Core dataset: an n x m feature matrix, dense integer class labels and the
// naming metadata needed to round-trip through CSV + JSON sidecar files.
struct Dataset {
  Eigen::MatrixXd features;               // n rows, m columns
  std::vector<int> labels;                // size n, values in [0, n_classes)
  std::vector<std::string> feature_names; // size m
  std::vector<std::string> class_names;   // dense id -> original label text
  std::string name;

  Eigen::Index n_rows() const { return features.rows(); }
  Eigen::Index n_features() const { return features.cols(); }
  int n_classes() const { return static_cast<int>(class_names.size()); }

  std::vector<std::int64_t> class_counts() const;

  // Throws DataError if any structural invariant is violated
  // (empty matrix, label/row mismatch, non-finite values, bad label ids).
  void validate() const;

  // Row subset in the given index order.
  Dataset subset(const std::vector<int>& rows) const;
};

// Centers and scales every feature column to sample mean 0 and sample
// standard deviation 1 (n-1 denominator). Zero-variance columns are dropped
// with a warning; if every column is constant a DataError is thrown.
Dataset z_score_normalize(const Dataset& d,
                          std::vector<std::string>* warnings = nullptr);

// Stratified hold-out partition: (train, test). Per-class test counts follow
// a largest-remainder allocation of round(n * test_fraction), so the split
// is exact and each class lands within one instance of proportionality.
// Classes with a single instance go to training with a warning.
// Deterministic for a fixed seed.
std::pair<Dataset, Dataset> stratified_split(
    const Dataset& d, double test_fraction, std::uint64_t seed,
    std::vector<std::string>* warnings = nullptr);

// CSV ingestion: header row required, label column selected by name.
// Feature columns where no cell parses as a number are dropped with a
// warning; rows with unparseable cells in retained numeric columns are
// rejected and counted in a warning.
Dataset read_csv(const std::string& path, const std::string& label_column,
                 std::vector<std::string>* warnings = nullptr);

// Writes features plus a trailing label column, full double precision.
// A JSON sidecar (path + ".meta.json") records name, feature names and the
// class id mapping.
void write_csv(const Dataset& d, const std::string& path,
               const std::string& label_column = "label");

// Majority class vs. rest reduction for multiclass data; binary datasets are
// returned unchanged. Ties on the majority count go to the lower class id.
Dataset binarize_majority_vs_rest(const Dataset& d,
                                  std::vector<std::string>* warnings = nullptr);

// Positive class used by F1/AUC/AP: the minority class (lower id on ties).
int minority_class(const Dataset& d);

}  // namespace treelab
