#include "treelab/impurity.hpp"

#include <cmath>

#include "treelab/error.hpp"

namespace treelab {

namespace {

std::int64_t total_of(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw MathError("impurity: negative class count");
    total += c;
  }
  return total;
}

}  // namespace

double gini(std::span<const std::int64_t> counts) {
  const std::int64_t total = total_of(counts);
  if (total == 0) throw MathError("gini: empty node");
  double sum_sq = 0.0;
  for (std::int64_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double entropy(std::span<const std::int64_t> counts) {
  const std::int64_t total = total_of(counts);
  if (total == 0) throw MathError("entropy: empty node");
  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double impurity(std::span<const std::int64_t> counts, ImpurityKind kind) {
  return kind == ImpurityKind::Gini ? gini(counts) : entropy(counts);
}

double weighted_child_impurity(std::span<const std::int64_t> left,
                               std::span<const std::int64_t> right,
                               ImpurityKind kind) {
  const std::int64_t nl = total_of(left);
  const std::int64_t nr = total_of(right);
  if (nl == 0 || nr == 0)
    throw MathError("weighted_child_impurity: empty child");
  const double n = static_cast<double>(nl + nr);
  return (nl / n) * impurity(left, kind) + (nr / n) * impurity(right, kind);
}

double split_gain(std::span<const std::int64_t> parent,
                  std::span<const std::int64_t> left,
                  std::span<const std::int64_t> right, ImpurityKind kind) {
  if (parent.size() != left.size() || parent.size() != right.size())
    throw MathError("split_gain: class count vectors differ in length");
  for (std::size_t k = 0; k < parent.size(); ++k) {
    if (left[k] + right[k] != parent[k])
      throw MathError("split_gain: children do not partition the parent");
  }
  return impurity(parent, kind) - weighted_child_impurity(left, right, kind);
}

}  // namespace treelab
