#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treelab/impurity.hpp"

namespace treelab {

enum class CandidateKind {
  CART,
  SVM,
  GradientSVM,
  Ridge,
  LeastSquares,
  ElasticNet,
  Lasso,
};

const char* candidate_kind_name(CandidateKind kind);
std::optional<CandidateKind> candidate_kind_from_name(const std::string& name);

// Linear split function: an instance goes left when alpha . x <= beta.
// Univariate splits have exactly one non-zero alpha entry, equal to 1.
struct SplitFunction {
  Eigen::VectorXd alpha;
  double beta = 0.0;
  CandidateKind kind = CandidateKind::CART;

  double project(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double z = 0.0;
    for (Eigen::Index j = 0; j < alpha.size(); ++j) z += alpha(j) * x(j);
    return z;
  }
  bool goes_left(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return project(x) <= beta;
  }
  int nonzero_count() const;
};

// Hyperparameters of the candidate solvers. The defaults apply whenever the
// experiment config does not override them.
struct SolverConfig {
  double ridge_lambda = 1.0;
  double lasso_lambda = 0.01;
  double enet_lambda = 0.01;
  double enet_mixing = 0.5;  // 1 = pure L1
  double svm_cost = 1.0;
  int max_iterations = 10000;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct ScoredSplit {
  SplitFunction split;
  double weighted_gini = 0.0;  // size-weighted child Gini, pool comparison key
  double gain = 0.0;           // impurity decrease under the learner criterion
  bool converged = true;
};

// Exhaustive univariate search: every feature, every threshold midway
// between consecutive distinct sorted values. Maximizes split_gain under
// `kind`; ties resolved toward the lower feature index, then the lower
// threshold. Returns nullopt when no feature admits a valid split.
std::optional<ScoredSplit> best_univariate_split(
    const Eigen::MatrixXd& X, const std::vector<int>& y,
    std::span<const int> rows, int num_classes, ImpurityKind kind);

// Fits one multivariate candidate: the solver provides the direction w, the
// threshold beta is then re-optimized by a 1-D Gini scan over the projections
// w . x. Returns nullopt for degenerate results (all-zero weights, constant
// projections) or when fewer than two classes are present.
std::optional<ScoredSplit> fit_linear_candidate(
    const Eigen::MatrixXd& X, const std::vector<int>& y,
    std::span<const int> rows, int num_classes, CandidateKind kind,
    const SolverConfig& cfg, std::uint64_t seed);

// Evaluates the full candidate pool (CART plus the six linear candidates)
// and keeps the split with the lowest weighted child Gini. Ties within 1e-12
// prefer CART, then fewer non-zero coefficients.
std::optional<ScoredSplit> omnivariate_select(const Eigen::MatrixXd& X,
                                              const std::vector<int>& y,
                                              std::span<const int> rows,
                                              int num_classes,
                                              const SolverConfig& cfg,
                                              std::uint64_t seed);

}  // namespace treelab
