#include "treelab/tree.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "treelab/error.hpp"
#include "treelab/rng.hpp"

namespace treelab {
namespace {

constexpr int kModelVersion = 1;

using nlohmann::json;

std::vector<std::int64_t> rows_counts(const std::vector<int>& y,
                                      const std::vector<int>& rows,
                                      int num_classes) {
  std::vector<std::int64_t> counts(num_classes, 0);
  for (int r : rows) ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
  return counts;
}

std::unique_ptr<TreeNode> make_leaf(std::uint64_t id,
                                    const std::vector<std::int64_t>& counts) {
  auto node = std::make_unique<TreeNode>();
  node->id = id;
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  node->count = total;
  node->distribution.resize(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c)
    node->distribution[c] =
        static_cast<double>(counts[c]) / static_cast<double>(total);
  return node;
}

struct Grower {
  const Eigen::MatrixXd& X;
  const std::vector<int>& y;
  int num_classes;
  const GrowthConfig& cfg;

  std::unique_ptr<TreeNode> build(std::vector<int>& rows, int depth,
                                  std::uint64_t id) const {
    const auto counts = rows_counts(y, rows, num_classes);
    int present = 0;
    for (auto c : counts) present += c > 0 ? 1 : 0;
    const bool stop = depth >= cfg.max_depth || present <= 1 ||
                      rows.size() < static_cast<std::size_t>(cfg.min_samples_split);
    if (stop) return make_leaf(id, counts);

    std::optional<ScoredSplit> chosen;
    if (cfg.family == TreeFamily::Univariate) {
      chosen = best_univariate_split(X, y, rows, num_classes,
                                     cfg.univariate_criterion);
    } else {
      const std::uint64_t node_seed =
          derive_seed(cfg.seed, {cfg.solver.seed, id});
      chosen = omnivariate_select(X, y, rows, num_classes, cfg.solver,
                                  node_seed);
    }
    if (!chosen) return make_leaf(id, counts);

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(rows.size());
    for (int r : rows) {
      if (chosen->split.goes_left(X.row(r)))
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    if (left_rows.empty() || right_rows.empty()) return make_leaf(id, counts);

    auto node = std::make_unique<TreeNode>();
    node->id = id;
    node->count = static_cast<std::int64_t>(rows.size());
    node->split = std::move(chosen->split);
    rows.clear();
    rows.shrink_to_fit();
    node->left = build(left_rows, depth + 1, 2 * id);
    node->right = build(right_rows, depth + 1, 2 * id + 1);
    return node;
  }
};

const TreeNode* descend(const TreeNode* node,
                        const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  while (!node->is_leaf())
    node = node->split->goes_left(x) ? node->left.get() : node->right.get();
  return node;
}

std::int64_t count_nodes(const TreeNode& n) {
  if (n.is_leaf()) return 1;
  return 1 + count_nodes(*n.left) + count_nodes(*n.right);
}

std::int64_t count_internal(const TreeNode& n) {
  if (n.is_leaf()) return 0;
  return 1 + count_internal(*n.left) + count_internal(*n.right);
}

int node_depth(const TreeNode& n) {
  if (n.is_leaf()) return 0;
  return 1 + std::max(node_depth(*n.left), node_depth(*n.right));
}

std::int64_t sum_nonzeros(const TreeNode& n) {
  if (n.is_leaf()) return 0;
  return n.split->nonzero_count() + sum_nonzeros(*n.left) +
         sum_nonzeros(*n.right);
}

json node_to_json(const TreeNode& n) {
  if (n.is_leaf()) {
    return json{{"leaf", json{{"dist", n.distribution}, {"count", n.count}}}};
  }
  json alpha = json::array();
  for (Eigen::Index j = 0; j < n.split->alpha.size(); ++j)
    if (n.split->alpha(j) != 0.0)
      alpha.push_back(json::array({j, n.split->alpha(j)}));
  return json{
      {"split", json{{"alpha", std::move(alpha)},
                     {"beta", n.split->beta},
                     {"kind", candidate_kind_name(n.split->kind)}}},
      {"left", node_to_json(*n.left)},
      {"right", node_to_json(*n.right)},
  };
}

std::unique_ptr<TreeNode> node_from_json(const json& j, std::uint64_t id,
                                         int n_features, int num_classes,
                                         TreeFamily family) {
  if (!j.is_object()) throw DataError("model: node must be an object");
  auto node = std::make_unique<TreeNode>();
  node->id = id;
  if (j.contains("leaf")) {
    const json& leaf = j.at("leaf");
    const auto dist = leaf.at("dist").get<std::vector<double>>();
    if (static_cast<int>(dist.size()) != num_classes)
      throw DataError("model: leaf distribution size mismatch");
    node->distribution = dist;
    node->count = leaf.at("count").get<std::int64_t>();
    if (node->count <= 0) throw DataError("model: leaf count must be positive");
    return node;
  }
  if (!j.contains("split") || !j.contains("left") || !j.contains("right"))
    throw DataError("model: internal node needs split, left, right");
  const json& s = j.at("split");
  SplitFunction split;
  split.alpha = Eigen::VectorXd::Zero(n_features);
  for (const auto& pair : s.at("alpha")) {
    if (!pair.is_array() || pair.size() != 2)
      throw DataError("model: alpha entries must be [index, value] pairs");
    const auto idx = pair.at(0).get<std::int64_t>();
    if (idx < 0 || idx >= n_features)
      throw DataError("model: alpha index out of range");
    split.alpha(static_cast<Eigen::Index>(idx)) = pair.at(1).get<double>();
  }
  split.beta = s.at("beta").get<double>();
  const auto kind = candidate_kind_from_name(s.at("kind").get<std::string>());
  if (!kind) throw DataError("model: unknown split kind");
  split.kind = *kind;
  if (family == TreeFamily::Univariate && split.nonzero_count() != 1)
    throw DataError("model: univariate split must use exactly one feature");
  if (split.nonzero_count() == 0)
    throw DataError("model: split has no non-zero coefficients");
  node->split = std::move(split);
  node->left = node_from_json(j.at("left"), 2 * id, n_features, num_classes,
                              family);
  node->right = node_from_json(j.at("right"), 2 * id + 1, n_features,
                               num_classes, family);
  node->count = node->left->count + node->right->count;
  return node;
}

}  // namespace

const char* tree_family_name(TreeFamily family) {
  return family == TreeFamily::Univariate ? "udt" : "mdt";
}

std::optional<TreeFamily> tree_family_from_name(const std::string& name) {
  std::string low;
  low.reserve(name.size());
  for (char ch : name) low.push_back(static_cast<char>(std::tolower(
      static_cast<unsigned char>(ch))));
  if (low == "udt" || low == "univariate") return TreeFamily::Univariate;
  if (low == "mdt" || low == "multivariate") return TreeFamily::Multivariate;
  return std::nullopt;
}

void GrowthConfig::validate() const {
  if (max_depth < 0) throw ConfigError("tree: max_depth must be >= 0");
  if (min_samples_split < 2)
    throw ConfigError("tree: min_samples_split must be >= 2");
  solver.validate();
}

DecisionTree DecisionTree::fit(const Eigen::MatrixXd& X,
                               const std::vector<int>& y, int num_classes,
                               const GrowthConfig& cfg) {
  cfg.validate();
  if (X.rows() == 0) throw DataError("tree: cannot fit on an empty dataset");
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw DataError("tree: feature/label row count mismatch");
  if (num_classes < 1) throw DataError("tree: need at least one class");
  for (int label : y)
    if (label < 0 || label >= num_classes)
      throw DataError("tree: label out of range");

  DecisionTree tree;
  tree.family_ = cfg.family;
  tree.max_depth_ = cfg.max_depth;
  tree.n_features_ = static_cast<int>(X.cols());
  tree.class_names_.resize(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c)
    tree.class_names_[static_cast<std::size_t>(c)] = "class_" + std::to_string(c);

  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  Grower grower{X, y, num_classes, cfg};
  tree.root_ = grower.build(rows, 0, 1);
  return tree;
}

DecisionTree DecisionTree::fit(const Dataset& train, const GrowthConfig& cfg) {
  train.validate();
  DecisionTree tree = fit(train.features, train.labels, train.n_classes(), cfg);
  tree.class_names_ = train.class_names;
  return tree;
}

int DecisionTree::predict_row(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return predict_proba(x).argmax();
}

std::vector<int> DecisionTree::predict(const Eigen::MatrixXd& X) const {
  if (static_cast<int>(X.cols()) != n_features_)
    throw DataError("tree: instance dimensionality mismatch");
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const TreeNode* leaf = descend(root_.get(), X.row(i));
    int best = 0;
    for (std::size_t c = 1; c < leaf->distribution.size(); ++c)
      if (leaf->distribution[c] > leaf->distribution[static_cast<std::size_t>(best)])
        best = static_cast<int>(c);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

ClassDistribution DecisionTree::predict_proba(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (static_cast<int>(x.size()) != n_features_)
    throw DataError("tree: instance dimensionality mismatch");
  ClassDistribution dist;
  dist.p = descend(root_.get(), x)->distribution;
  return dist;
}

std::int64_t DecisionTree::tree_size() const { return count_nodes(*root_); }

std::int64_t DecisionTree::internal_count() const {
  return count_internal(*root_);
}

int DecisionTree::depth() const { return node_depth(*root_); }

double DecisionTree::nonzero_ratio() const {
  const std::int64_t internal = internal_count();
  if (internal == 0)
    throw MathError("nonzero_ratio is undefined for a single-leaf tree");
  return static_cast<double>(sum_nonzeros(*root_)) /
         (static_cast<double>(n_features_) * static_cast<double>(internal));
}

std::string DecisionTree::to_json() const {
  json j{
      {"version", kModelVersion},
      {"family", tree_family_name(family_)},
      {"max_depth", max_depth_},
      {"classes", class_names_},
      {"n_features", n_features_},
      {"root", node_to_json(*root_)},
  };
  return j.dump(2);
}

DecisionTree DecisionTree::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model: parse failure: ") + e.what());
  }
  try {
    if (!j.contains("version"))
      throw DataError("model: missing version field");
    const int version = j.at("version").get<int>();
    if (version != kModelVersion)
      throw DataError("model: unsupported version " + std::to_string(version) +
                      ", expected " + std::to_string(kModelVersion));
    DecisionTree tree;
    const auto family = tree_family_from_name(j.at("family").get<std::string>());
    if (!family) throw DataError("model: unknown family");
    tree.family_ = *family;
    tree.max_depth_ = j.at("max_depth").get<int>();
    if (tree.max_depth_ < 0) throw DataError("model: negative max_depth");
    tree.class_names_ = j.at("classes").get<std::vector<std::string>>();
    if (tree.class_names_.empty()) throw DataError("model: empty class list");
    tree.n_features_ = j.at("n_features").get<int>();
    if (tree.n_features_ <= 0) throw DataError("model: invalid n_features");
    tree.root_ = node_from_json(j.at("root"), 1, tree.n_features_,
                                tree.n_classes(), tree.family_);
    if (node_depth(*tree.root_) > tree.max_depth_)
      throw DataError("model: tree deeper than its declared max_depth");
    return tree;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: schema violation: ") + e.what());
  }
}

void DecisionTree::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("model: cannot open " + path.string() +
                            " for writing");
  out << to_json() << '\n';
  if (!out) throw DataError("model: write failure on " + path.string());
}

DecisionTree DecisionTree::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("model: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace treelab
