#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "treelab/rng.hpp"

using namespace treelab;

TEST_SUITE("rng") {

TEST_CASE("engine matches the standard mt19937_64 reference value") {
  // The 10000th draw of a default-seeded mt19937_64 is pinned by the
  // standard; our wrapper must not perturb the stream.
  Rng rng(5489u);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("same seed same stream, different seed different stream") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next();
    all_equal = all_equal && (va == b.next());
    any_diff = any_diff || (va != c.next());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("derive_seed separates streams and is order sensitive") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
  CHECK(derive_seed(0, {}) != 0);
  // no collisions over a small grid of key tuples
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 50; ++i)
    for (std::uint64_t j = 0; j < 50; ++j)
      seen.insert(derive_seed(7, {i, j}));
  CHECK(seen.size() == 2500);
}

TEST_CASE("uniform01 stays in the unit interval") {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("bernoulli frequency") {
  Rng rng(99);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
  CHECK(std::abs(static_cast<double>(hits) / n - 0.3) < 0.01);
}

TEST_CASE("below covers its range without exceeding it") {
  Rng rng(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.below(10);
    CHECK(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("shuffle permutes and is seed deterministic") {
  std::vector<int> base(50);
  for (int i = 0; i < 50; ++i) base[static_cast<std::size_t>(i)] = i;

  auto v1 = base, v2 = base;
  Rng a(11), b(11);
  a.shuffle(v1);
  b.shuffle(v2);
  CHECK(v1 == v2);
  CHECK(v1 != base);

  auto sorted = v1;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == base);
}

}  // TEST_SUITE
