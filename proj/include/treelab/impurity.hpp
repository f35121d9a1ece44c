#pragma once
#include <cstdint>
#include <span>
#include <vector>

namespace treelab {

enum class ImpurityKind { Gini, ShannonEntropy };

// Gini impurity of a node given per-class instance counts.
// Range [0, 1 - 1/K]; zero exactly when the node is pure.
double gini(std::span<const std::int64_t> counts);

// Shannon entropy in bits (base-2 log), with the 0*log(0) = 0 convention.
double entropy(std::span<const std::int64_t> counts);

double impurity(std::span<const std::int64_t> counts, ImpurityKind kind);

// Impurity decrease of a binary partition: parent impurity minus the
// size-weighted child impurities. Non-negative up to rounding for both
// Gini and entropy. Throws if a child is empty or the counts are
// inconsistent with the parent.
double split_gain(std::span<const std::int64_t> parent,
                  std::span<const std::int64_t> left,
                  std::span<const std::int64_t> right, ImpurityKind kind);

// Size-weighted child impurity, the quantity minimized when comparing
// omnivariate candidates. split_gain == impurity(parent) - this value.
double weighted_child_impurity(std::span<const std::int64_t> left,
                               std::span<const std::int64_t> right,
                               ImpurityKind kind);

}  // namespace treelab
