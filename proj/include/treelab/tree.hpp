#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treelab/dataset.hpp"
#include "treelab/split.hpp"

namespace treelab {

enum class TreeFamily {
  Univariate,   // axis-parallel splits only
  Multivariate,  // full candidate pool at every node
};

const char* tree_family_name(TreeFamily family);
std::optional<TreeFamily> tree_family_from_name(const std::string& name);

struct GrowthConfig {
  TreeFamily family = TreeFamily::Univariate;
  int max_depth = 16;
  int min_samples_split = 2;
  ImpurityKind univariate_criterion = ImpurityKind::Gini;
  SolverConfig solver;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Binary tree node. Leaves hold the empirical class distribution of their
// training rows; internal nodes hold a split function and two children.
// Ids follow heap numbering (root 1, children 2*id and 2*id+1) so per-node
// solver seeds do not depend on traversal order.
struct TreeNode {
  std::uint64_t id = 1;
  std::int64_t count = 0;
  std::vector<double> distribution;
  std::optional<SplitFunction> split;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;

  bool is_leaf() const { return !split.has_value(); }
};

class DecisionTree {
 public:
  static DecisionTree fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                          int num_classes, const GrowthConfig& cfg);
  static DecisionTree fit(const Dataset& train, const GrowthConfig& cfg);

  int predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& X) const;
  ClassDistribution predict_proba(
      const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  std::int64_t tree_size() const;       // all nodes, internal plus leaves
  std::int64_t internal_count() const;
  int depth() const;                    // single leaf has depth 0
  // Mean fraction of non-zero split coefficients over internal nodes.
  // Throws MathError on a tree without internal nodes.
  double nonzero_ratio() const;

  const TreeNode& root() const { return *root_; }
  TreeFamily family() const { return family_; }
  int max_depth() const { return max_depth_; }
  int n_features() const { return n_features_; }
  int n_classes() const { return static_cast<int>(class_names_.size()); }
  const std::vector<std::string>& class_names() const { return class_names_; }

  std::string to_json() const;
  static DecisionTree from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static DecisionTree load(const std::filesystem::path& path);

 private:
  DecisionTree() = default;

  std::unique_ptr<TreeNode> root_;
  TreeFamily family_ = TreeFamily::Univariate;
  int max_depth_ = 0;
  int n_features_ = 0;
  std::vector<std::string> class_names_;
};

}  // namespace treelab
