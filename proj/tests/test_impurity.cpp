#include <array>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "treelab/error.hpp"
#include "treelab/impurity.hpp"
#include "treelab/rng.hpp"

using namespace treelab;

namespace {
std::vector<std::int64_t> counts(std::initializer_list<std::int64_t> c) {
  return std::vector<std::int64_t>(c);
}
}  // namespace

TEST_SUITE("impurity") {

TEST_CASE("gini of known distributions") {
  CHECK(gini(counts({3, 1})) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(gini(counts({2, 2})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gini(counts({4, 0})) == 0.0);
  CHECK(gini(counts({0, 7})) == 0.0);
  CHECK(gini(counts({1, 1, 2})) == doctest::Approx(0.625).epsilon(1e-15));
  // uniform over K classes approaches 1 - 1/K
  CHECK(gini(counts({5, 5, 5, 5})) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("entropy of known distributions") {
  CHECK(entropy(counts({2, 2})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(entropy(counts({4, 0})) == 0.0);
  CHECK(entropy(counts({3, 1})) ==
        doctest::Approx(0.8112781244591328).epsilon(1e-14));
  CHECK(entropy(counts({1, 1, 1, 1})) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("impurity dispatches on kind") {
  const auto c = counts({3, 1});
  CHECK(impurity(c, ImpurityKind::Gini) == gini(c));
  CHECK(impurity(c, ImpurityKind::ShannonEntropy) == entropy(c));
}

TEST_CASE("split gain of a known partition") {
  const auto parent = counts({4, 4});
  const auto left = counts({3, 1});
  const auto right = counts({1, 3});
  CHECK(split_gain(parent, left, right, ImpurityKind::Gini) ==
        doctest::Approx(0.125).epsilon(1e-14));
  CHECK(split_gain(parent, left, right, ImpurityKind::ShannonEntropy) ==
        doctest::Approx(0.1887218755408671).epsilon(1e-13));
  CHECK(weighted_child_impurity(left, right, ImpurityKind::Gini) ==
        doctest::Approx(0.375).epsilon(1e-14));
}

TEST_CASE("a pure-children partition recovers the whole parent impurity") {
  const auto parent = counts({6, 2});
  CHECK(split_gain(parent, counts({6, 0}), counts({0, 2}),
                   ImpurityKind::Gini) ==
        doctest::Approx(gini(parent)).epsilon(1e-14));
}

TEST_CASE("invalid partitions are rejected") {
  CHECK_THROWS_AS(gini(counts({0, 0})), MathError);
  CHECK_THROWS_AS(entropy(counts({0, 0})), MathError);
  CHECK_THROWS_AS(gini(counts({3, -1})), MathError);
  CHECK_THROWS_AS(split_gain(counts({4, 4}), counts({4, 4}), counts({0, 0}),
                             ImpurityKind::Gini),
                  MathError);
  CHECK_THROWS_AS(split_gain(counts({4, 4}), counts({3, 1}), counts({2, 3}),
                             ImpurityKind::Gini),
                  MathError);
  CHECK_THROWS_AS(split_gain(counts({4, 4}), counts({3, 1}), counts({1, 3, 0}),
                             ImpurityKind::Gini),
                  MathError);
}

TEST_CASE("gain is non-negative for random partitions") {
  Rng rng(20240817);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(4));
    std::vector<std::int64_t> left(static_cast<std::size_t>(k), 0);
    std::vector<std::int64_t> right(static_cast<std::size_t>(k), 0);
    for (int c = 0; c < k; ++c) {
      left[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(rng.below(20));
      right[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(rng.below(20));
    }
    std::int64_t nl = 0, nr = 0;
    for (int c = 0; c < k; ++c) {
      nl += left[static_cast<std::size_t>(c)];
      nr += right[static_cast<std::size_t>(c)];
    }
    if (nl == 0 || nr == 0) continue;
    std::vector<std::int64_t> parent(static_cast<std::size_t>(k), 0);
    for (int c = 0; c < k; ++c)
      parent[static_cast<std::size_t>(c)] =
          left[static_cast<std::size_t>(c)] + right[static_cast<std::size_t>(c)];
    for (auto kind : {ImpurityKind::Gini, ImpurityKind::ShannonEntropy}) {
      const double gain = split_gain(parent, left, right, kind);
      CHECK(gain >= -1e-12);
      CHECK(impurity(parent, kind) - weighted_child_impurity(left, right, kind)
            == doctest::Approx(gain).epsilon(1e-12));
    }
  }
}

}  // TEST_SUITE
