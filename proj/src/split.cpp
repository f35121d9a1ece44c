#include "treelab/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "treelab/error.hpp"
#include "treelab/linear.hpp"
#include "treelab/rng.hpp"

namespace treelab {
namespace {

constexpr double kPoolTie = 1e-12;

struct KindName {
  CandidateKind kind;
  const char* name;
};

constexpr std::array<KindName, 7> kKindNames{{
    {CandidateKind::CART, "cart"},
    {CandidateKind::SVM, "svm"},
    {CandidateKind::GradientSVM, "gradient_svm"},
    {CandidateKind::Ridge, "ridge"},
    {CandidateKind::LeastSquares, "least_squares"},
    {CandidateKind::ElasticNet, "elastic_net"},
    {CandidateKind::Lasso, "lasso"},
}};

double counts_impurity(std::span<const std::int64_t> counts, ImpurityKind kind) {
  return impurity(counts, kind);
}

// Shared 1-D scan: given projection/label pairs, finds the threshold midway
// between consecutive distinct projections that minimizes the size-weighted
// child impurity. Ties keep the lowest threshold.
struct ScanResult {
  double beta = 0.0;
  double weighted = 0.0;
  std::vector<std::int64_t> left;
  std::vector<std::int64_t> right;
};

std::optional<ScanResult> scan_threshold(std::vector<std::pair<double, int>>& zl,
                                         int num_classes, ImpurityKind kind) {
  const std::size_t n = zl.size();
  if (n < 2) return std::nullopt;
  std::sort(zl.begin(), zl.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  if (zl.front().first == zl.back().first) return std::nullopt;

  std::vector<std::int64_t> total(num_classes, 0);
  for (const auto& [z, c] : zl) ++total[c];
  std::vector<std::int64_t> left(num_classes, 0);

  bool found = false;
  double best_weighted = 0.0;
  double best_beta = 0.0;
  std::size_t best_prefix = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ++left[zl[i].second];
    if (zl[i].first == zl[i + 1].first) continue;
    std::vector<std::int64_t> right(num_classes);
    for (int c = 0; c < num_classes; ++c) right[c] = total[c] - left[c];
    const double nl = static_cast<double>(i + 1);
    const double nr = static_cast<double>(n - i - 1);
    const double weighted = (nl * counts_impurity(left, kind) +
                             nr * counts_impurity(right, kind)) /
                            static_cast<double>(n);
    if (!found || weighted < best_weighted) {
      found = true;
      best_weighted = weighted;
      double beta = 0.5 * (zl[i].first + zl[i + 1].first);
      // Guard against the midpoint rounding onto either endpoint: the lower
      // value always realizes the intended partition under `<=`.
      if (!(beta > zl[i].first && beta < zl[i + 1].first)) beta = zl[i].first;
      best_beta = beta;
      best_prefix = i + 1;
    }
  }
  if (!found) return std::nullopt;

  ScanResult res;
  res.beta = best_beta;
  res.weighted = best_weighted;
  res.left.assign(num_classes, 0);
  for (std::size_t i = 0; i < best_prefix; ++i) ++res.left[zl[i].second];
  res.right.assign(num_classes, 0);
  for (int c = 0; c < num_classes; ++c) res.right[c] = total[c] - res.left[c];
  return res;
}

std::vector<std::int64_t> node_counts(const std::vector<int>& y,
                                      std::span<const int> rows,
                                      int num_classes) {
  std::vector<std::int64_t> counts(num_classes, 0);
  for (int r : rows) {
    if (r < 0 || static_cast<std::size_t>(r) >= y.size())
      throw DataError("split: row index out of range");
    const int c = y[static_cast<std::size_t>(r)];
    if (c < 0 || c >= num_classes)
      throw DataError("split: label out of range");
    ++counts[c];
  }
  return counts;
}

}  // namespace

const char* candidate_kind_name(CandidateKind kind) {
  for (const auto& e : kKindNames)
    if (e.kind == kind) return e.name;
  throw ConfigError("unknown candidate kind");
}

std::optional<CandidateKind> candidate_kind_from_name(const std::string& name) {
  for (const auto& e : kKindNames)
    if (name == e.name) return e.kind;
  return std::nullopt;
}

int SplitFunction::nonzero_count() const {
  int n = 0;
  for (Eigen::Index j = 0; j < alpha.size(); ++j)
    if (alpha(j) != 0.0) ++n;
  return n;
}

void SolverConfig::validate() const {
  if (!(ridge_lambda >= 0.0))
    throw ConfigError("solver: ridge_lambda must be >= 0");
  if (!(lasso_lambda >= 0.0))
    throw ConfigError("solver: lasso_lambda must be >= 0");
  if (!(enet_lambda >= 0.0))
    throw ConfigError("solver: enet_lambda must be >= 0");
  if (!(enet_mixing >= 0.0 && enet_mixing <= 1.0))
    throw ConfigError("solver: enet_mixing must be in [0, 1]");
  if (!(svm_cost > 0.0)) throw ConfigError("solver: svm_cost must be > 0");
  if (max_iterations <= 0)
    throw ConfigError("solver: max_iterations must be > 0");
  if (!(tolerance > 0.0)) throw ConfigError("solver: tolerance must be > 0");
}

std::optional<ScoredSplit> best_univariate_split(
    const Eigen::MatrixXd& X, const std::vector<int>& y,
    std::span<const int> rows, int num_classes, ImpurityKind kind) {
  if (rows.size() < 2) return std::nullopt;
  const auto parent = node_counts(y, rows, num_classes);
  const double parent_imp = counts_impurity(parent, kind);

  bool found = false;
  ScanResult best;
  int best_feature = -1;
  std::vector<std::pair<double, int>> zl;
  zl.reserve(rows.size());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    zl.clear();
    for (int r : rows)
      zl.emplace_back(X(r, j), y[static_cast<std::size_t>(r)]);
    auto scan = scan_threshold(zl, num_classes, kind);
    if (!scan) continue;
    if (!found || scan->weighted < best.weighted) {
      found = true;
      best = std::move(*scan);
      best_feature = static_cast<int>(j);
    }
  }
  if (!found) return std::nullopt;

  const double gain = parent_imp - best.weighted;
  if (!(gain > 0.0)) return std::nullopt;

  ScoredSplit out;
  out.split.alpha = Eigen::VectorXd::Zero(X.cols());
  out.split.alpha(best_feature) = 1.0;
  out.split.beta = best.beta;
  out.split.kind = CandidateKind::CART;
  out.gain = gain;
  out.weighted_gini =
      kind == ImpurityKind::Gini
          ? best.weighted
          : weighted_child_impurity(best.left, best.right, ImpurityKind::Gini);
  out.converged = true;
  return out;
}

std::optional<ScoredSplit> fit_linear_candidate(
    const Eigen::MatrixXd& X, const std::vector<int>& y,
    std::span<const int> rows, int num_classes, CandidateKind kind,
    const SolverConfig& cfg, std::uint64_t seed) {
  if (kind == CandidateKind::CART)
    throw ConfigError("fit_linear_candidate: CART has no linear solver");
  if (rows.size() < 2) return std::nullopt;

  const auto counts = node_counts(y, rows, num_classes);
  int lo = -1, hi = -1, present = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) continue;
    ++present;
    if (lo < 0)
      lo = c;
    else
      hi = c;
  }
  if (present != 2) return std::nullopt;

  const Eigen::Index d = X.cols();
  Eigen::MatrixXd Xs(static_cast<Eigen::Index>(rows.size()), d);
  Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Xs.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    t(static_cast<Eigen::Index>(i)) =
        y[static_cast<std::size_t>(rows[i])] == lo ? -1.0 : 1.0;
  }

  linear::FitResult fit;
  switch (kind) {
    case CandidateKind::SVM:
      fit = linear::svm_subgradient(Xs, t, cfg.svm_cost, cfg.tolerance,
                                    cfg.max_iterations, seed);
      break;
    case CandidateKind::GradientSVM:
      fit = linear::svm_smoothed_gradient(Xs, t, cfg.svm_cost, cfg.tolerance,
                                          cfg.max_iterations);
      break;
    case CandidateKind::Ridge:
      fit = linear::ridge(Xs, t, cfg.ridge_lambda);
      break;
    case CandidateKind::LeastSquares:
      fit = linear::least_squares(Xs, t);
      break;
    case CandidateKind::ElasticNet:
      fit = linear::elastic_net(Xs, t, cfg.enet_lambda, cfg.enet_mixing,
                                cfg.tolerance, cfg.max_iterations);
      break;
    case CandidateKind::Lasso:
      fit = linear::elastic_net(Xs, t, cfg.lasso_lambda, 1.0, cfg.tolerance,
                                cfg.max_iterations);
      break;
    case CandidateKind::CART:
      return std::nullopt;
  }
  if (fit.w.size() != d || fit.w.cwiseAbs().maxCoeff() == 0.0)
    return std::nullopt;

  SplitFunction split;
  split.alpha = fit.w;
  split.kind = kind;

  // Project through the same code path predict uses, so scan-time and
  // predict-time tie behavior cannot diverge.
  std::vector<std::pair<double, int>> zl;
  zl.reserve(rows.size());
  for (int r : rows)
    zl.emplace_back(split.project(X.row(r)), y[static_cast<std::size_t>(r)]);

  auto scan = scan_threshold(zl, num_classes, ImpurityKind::Gini);
  if (!scan) return std::nullopt;

  const auto parent = node_counts(y, rows, num_classes);
  const double parent_gini = counts_impurity(parent, ImpurityKind::Gini);
  const double gain = parent_gini - scan->weighted;
  if (!(gain > 0.0)) return std::nullopt;

  ScoredSplit out;
  split.beta = scan->beta;
  out.split = std::move(split);
  out.weighted_gini = scan->weighted;
  out.gain = gain;
  out.converged = fit.converged;
  return out;
}

std::optional<ScoredSplit> omnivariate_select(const Eigen::MatrixXd& X,
                                              const std::vector<int>& y,
                                              std::span<const int> rows,
                                              int num_classes,
                                              const SolverConfig& cfg,
                                              std::uint64_t seed) {
  auto cart = best_univariate_split(X, y, rows, num_classes, ImpurityKind::Gini);

  constexpr std::array<CandidateKind, 6> pool{
      CandidateKind::SVM,        CandidateKind::GradientSVM,
      CandidateKind::Ridge,      CandidateKind::LeastSquares,
      CandidateKind::ElasticNet, CandidateKind::Lasso,
  };
  std::vector<ScoredSplit> candidates;
  candidates.reserve(pool.size() + 1);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto fitted =
        fit_linear_candidate(X, y, rows, num_classes, pool[i], cfg,
                             derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    if (fitted) candidates.push_back(std::move(*fitted));
  }
  if (cart) candidates.push_back(std::move(*cart));
  if (candidates.empty()) return std::nullopt;

  double best_gini = candidates.front().weighted_gini;
  for (const auto& c : candidates) best_gini = std::min(best_gini, c.weighted_gini);

  const ScoredSplit* chosen = nullptr;
  for (const auto& c : candidates) {
    if (c.weighted_gini > best_gini + kPoolTie) continue;
    if (!chosen) {
      chosen = &c;
      continue;
    }
    const bool c_cart = c.split.kind == CandidateKind::CART;
    const bool b_cart = chosen->split.kind == CandidateKind::CART;
    if (c_cart != b_cart) {
      if (c_cart) chosen = &c;
      continue;
    }
    if (c.split.nonzero_count() < chosen->split.nonzero_count()) chosen = &c;
  }
  return *chosen;
}

}  // namespace treelab
