#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "treelab/diagnostics.hpp"
#include "treelab/error.hpp"
#include "treelab/rng.hpp"
#include "treelab/synthgen.hpp"

using namespace treelab;
using namespace treelab::diagnostics;

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Quadratic-time tau-b straight from the definition.
double kendall_oracle(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++ties_x;
      if (dy == 0.0) ++ties_y;
      const int s = sign_of(dx) * sign_of(dy);
      if (s > 0) ++concordant;
      if (s < 0) ++discordant;
    }
  const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1) / 2.0;
  return static_cast<double>(concordant - discordant) /
         (std::sqrt(n0 - static_cast<double>(ties_x)) *
          std::sqrt(n0 - static_cast<double>(ties_y)));
}

// Rank average by sorting, then the plain product-moment formula by loops.
std::vector<double> rank_oracle(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double pearson_oracle(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> random_vector(Rng& rng, std::size_t n, bool with_ties) {
  std::vector<double> v(n);
  for (auto& x : v)
    x = with_ties ? std::floor(rng.normal() * 3.0) / 3.0 : rng.normal();
  return v;
}

Dataset oblique_dataset(int n, std::uint64_t seed) {
  Dataset d;
  d.features.resize(n, 2);
  d.labels.resize(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double x1 = rng.normal();
    const double x2 = 0.9 * x1 + std::sqrt(1.0 - 0.81) * rng.normal();
    d.features(i, 0) = x1;
    d.features(i, 1) = x2;
    d.labels[static_cast<std::size_t>(i)] = x2 > x1 ? 1 : 0;
  }
  d.feature_names = {"x1", "x2"};
  d.class_names = {"0", "1"};
  d.name = "oblique";
  return d;
}

Dataset axis_dataset(int n, std::uint64_t seed) {
  Dataset d;
  d.features.resize(n, 2);
  d.labels.resize(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    d.features(i, 0) = rng.normal();
    d.features(i, 1) = rng.normal();
    d.labels[static_cast<std::size_t>(i)] = d.features(i, 0) > 0.0 ? 1 : 0;
  }
  d.feature_names = {"x1", "x2"};
  d.class_names = {"0", "1"};
  d.name = "axis";
  return d;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("correlations of a small hand-checked sample") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {1, 3, 2, 5, 4};
  CHECK(kendall_tau(x, y) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(spearman(x, y) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("correlations of a tied sample match reference values") {
  // Pinned against an independent statistics package.
  const std::vector<double> x = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  const std::vector<double> y = {2, 7, 1, 8, 2, 8, 1, 8, 2, 8};
  CHECK(pearson(x, y) ==
        doctest::Approx(0.10492284287735881).epsilon(1e-13));
  CHECK(spearman(x, y) ==
        doctest::Approx(0.13471506281091267).epsilon(1e-13));
  CHECK(kendall_tau(x, y) ==
        doctest::Approx(0.13041013273932525).epsilon(1e-13));
}

TEST_CASE("fast kendall agrees with the quadratic definition") {
  Rng rng(9001);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.below(150);
    const bool ties = trial % 2 == 0;
    const auto x = random_vector(rng, n, ties);
    const auto y = random_vector(rng, n, ties);
    if (std::set<double>(x.begin(), x.end()).size() < 2) continue;
    if (std::set<double>(y.begin(), y.end()).size() < 2) continue;
    CHECK(kendall_tau(x, y) ==
          doctest::Approx(kendall_oracle(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("spearman equals pearson on average ranks") {
  Rng rng(9002);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + rng.below(150);
    const auto x = random_vector(rng, n, trial % 2 == 0);
    const auto y = random_vector(rng, n, trial % 3 == 0);
    if (std::set<double>(x.begin(), x.end()).size() < 2) continue;
    if (std::set<double>(y.begin(), y.end()).size() < 2) continue;
    CHECK(spearman(x, y) ==
          doctest::Approx(pearson_oracle(rank_oracle(x), rank_oracle(y)))
              .epsilon(1e-12));
  }
}

TEST_CASE("average ranks share tied positions") {
  const std::vector<double> x = {10, 20, 20, 30};
  const auto r = average_ranks(x);
  const std::vector<double> expected_ranks{1.0, 2.5, 2.5, 4.0};
  CHECK(r == expected_ranks);
  const auto oracle = rank_oracle(x);
  CHECK(r == oracle);
}

TEST_CASE("correlation symmetry and transformation behavior") {
  Rng rng(9003);
  const auto x = random_vector(rng, 80, false);
  const auto y = random_vector(rng, 80, false);
  for (auto f : {pearson, spearman, kendall_tau}) {
    CHECK(f(x, y) == doctest::Approx(f(y, x)).epsilon(1e-13));
    CHECK(f(x, x) == doctest::Approx(1.0).epsilon(1e-13));
  }
  std::vector<double> neg(y.size()), scaled(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    neg[i] = -y[i];
    scaled[i] = 3.0 * y[i] + 7.0;
  }
  CHECK(pearson(x, neg) == doctest::Approx(-pearson(x, y)).epsilon(1e-13));
  CHECK(kendall_tau(x, neg) ==
        doctest::Approx(-kendall_tau(x, y)).epsilon(1e-13));
  CHECK(pearson(x, scaled) == doctest::Approx(pearson(x, y)).epsilon(1e-13));
  CHECK(spearman(x, scaled) == doctest::Approx(spearman(x, y)).epsilon(1e-13));
}

TEST_CASE("constant inputs are rejected") {
  const std::vector<double> c = {2, 2, 2, 2};
  const std::vector<double> x = {1, 2, 3, 4};
  CHECK_THROWS_AS(pearson(c, x), MathError);
  CHECK_THROWS_AS(spearman(x, c), MathError);
  CHECK_THROWS_AS(kendall_tau(c, c), MathError);
}

TEST_CASE("empirical cdf is right continuous") {
  const auto cdf = make_cdf({1, 2, 2, 3});
  CHECK(cdf.n == 4);
  const std::vector<double> expected_xs{1, 2, 3};
  const std::vector<double> expected_fs{0.25, 0.75, 1.0};
  CHECK(cdf.xs == expected_xs);
  CHECK(cdf.fs == expected_fs);
  CHECK(cdf(0.5) == 0.0);
  CHECK(cdf(1.0) == 0.25);
  CHECK(cdf(1.99) == 0.25);
  CHECK(cdf(2.0) == 0.75);
  CHECK(cdf(2.5) == 0.75);
  CHECK(cdf(3.0) == 1.0);
  CHECK(cdf(99.0) == 1.0);
}

TEST_CASE("feature pair sampling") {
  CHECK(all_feature_pairs(4).size() == 6);
  CHECK(all_feature_pairs(1).empty());

  // under the cap: everything, in order
  const auto all = sample_feature_pairs(4, 100, 1);
  CHECK(all == all_feature_pairs(4));

  // over the cap: exactly cap distinct sorted pairs, stable per seed
  const auto a = sample_feature_pairs(40, 50, 7);
  const auto b = sample_feature_pairs(40, 50, 7);
  const auto c = sample_feature_pairs(40, 50, 8);
  CHECK(a.size() == 50);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<std::array<int, 2>>(a.begin(), a.end()).size() == 50);
  for (const auto& p : a) {
    CHECK(p[0] < p[1]);
    CHECK(p[1] < 40);
  }
}

TEST_CASE("slope folding maps onto the acute axis distance") {
  CHECK(slope_fold(0.0) == 0.0);
  CHECK(slope_fold(30.0) == doctest::Approx(30.0));
  CHECK(slope_fold(60.0) == doctest::Approx(30.0));
  CHECK(slope_fold(90.0) == doctest::Approx(0.0));
  CHECK(slope_fold(-30.0) == doctest::Approx(30.0));
  CHECK(slope_fold(-60.0) == doctest::Approx(30.0));
  CHECK(slope_fold(45.0) == doctest::Approx(45.0));
  CHECK(slope_fold(-45.0) == doctest::Approx(45.0));
  CHECK_THROWS_AS(slope_fold(120.0), MathError);
}

TEST_CASE("win test flags an oblique boundary") {
  const Dataset d = oblique_dataset(600, 41);
  WinTestConfig cfg;
  cfg.seed = 4;
  const auto results = pairwise_win_test(d, cfg);
  REQUIRE(results.size() == 1);
  const auto& r = results[0];
  CHECK(!r.degenerate);
  CHECK(r.acc_both > r.acc_i);
  CHECK(r.acc_both > r.acc_j);
  CHECK(r.wins(0.05));
  CHECK(r.phi_hat_deg >= 35.0);
  CHECK(r.phi_hat_deg <= 45.0);
}

TEST_CASE("win test stays quiet on an axis-parallel boundary") {
  const Dataset d = axis_dataset(600, 42);
  WinTestConfig cfg;
  cfg.seed = 5;
  const auto results = pairwise_win_test(d, cfg);
  REQUIRE(results.size() == 1);
  CHECK(!results[0].wins(0.02));
}

TEST_CASE("win test marks unusable fits as degenerate") {
  Dataset d = oblique_dataset(200, 43);
  d.features.conservativeResize(Eigen::NoChange, 3);
  d.features.col(2).setConstant(1.0);
  d.feature_names.push_back("flat");
  WinTestConfig cfg;
  cfg.seed = 6;
  const auto results = pairwise_win_test(d, cfg);
  REQUIRE(results.size() == 3);
  for (const auto& r : results) {
    if (r.j == 2) {
      CHECK(r.degenerate);
      CHECK(!r.wins(0.0));
    }
  }
}

TEST_CASE("win test rejects unusable datasets") {
  Dataset d = oblique_dataset(50, 44);
  WinTestConfig cfg;
  Dataset one_feature = d;
  one_feature.features.conservativeResize(Eigen::NoChange, 1);
  one_feature.feature_names = {"x1"};
  CHECK_THROWS_AS(pairwise_win_test(one_feature, cfg), DataError);

  Dataset three_classes = d;
  three_classes.class_names = {"0", "1", "2"};
  three_classes.labels[0] = 2;
  CHECK_THROWS_AS(pairwise_win_test(three_classes, cfg), DataError);
}

TEST_CASE("win curve weights and averages by dataset") {
  PairResult win;
  win.acc_i = 0.6;
  win.acc_j = 0.6;
  win.acc_both = 0.9;
  win.phi_hat_deg = 10.4;

  PairResult lose = win;
  lose.acc_both = 0.6;
  lose.phi_hat_deg = 20.0;

  PairResult broken;
  broken.degenerate = true;

  // dataset A: two usable pairs, one win; dataset B: one usable pair, no win
  const std::vector<std::vector<PairResult>> per_dataset = {
      {win, lose, broken}, {lose}};
  const auto curve = weighted_win_curve(per_dataset, 0.02);
  REQUIRE(curve.phi_deg.size() == 46);
  CHECK(curve.phi_deg.front() == 0.0);
  CHECK(curve.phi_deg.back() == 45.0);
  CHECK(curve.cumulative[10] == doctest::Approx(0.0));
  // the win lands at ceil(10.4) = 11 with weight 1/2, averaged over 2 sets
  CHECK(curve.cumulative[11] == doctest::Approx(0.25));
  CHECK(curve.cumulative[45] == doctest::Approx(0.25));
  CHECK(curve.final_fraction == doctest::Approx(0.25));

  // a dataset with no usable pair is left out of the average entirely
  const std::vector<std::vector<PairResult>> with_empty = {
      {win, lose}, {broken}};
  CHECK(weighted_win_curve(with_empty, 0.02).final_fraction ==
        doctest::Approx(0.5));
}

TEST_CASE("correlation cdfs skip constant columns") {
  Dataset d = axis_dataset(100, 45);
  d.features.conservativeResize(Eigen::NoChange, 3);
  d.features.col(2).setConstant(0.0);
  d.feature_names.push_back("flat");

  const auto cdfs = correlation_cdf({d}, CorrelationKind::Pearson);
  CHECK(cdfs.pair_level.n == 1);  // only the (0, 1) pair survives
  CHECK(cdfs.dataset_level.n == 1);
  CHECK(cdfs.skipped_pairs == 2);
}

TEST_CASE("bias report aggregates pairs, correlations and curves") {
  const Dataset a = oblique_dataset(300, 46);
  const Dataset b = axis_dataset(300, 47);
  WinTestConfig cfg;
  cfg.seed = 9;
  const auto report = build_bias_report({a, b}, cfg, true, {0.02, 0.05});
  REQUIRE(report.datasets.size() == 2);
  const std::vector<double> expected_margins{0.02, 0.05};
  CHECK(report.win_margins == expected_margins);
  REQUIRE(report.curves.size() == 2);

  const auto& first = report.datasets[0];
  CHECK(first.name == "oblique");
  CHECK(first.pairs_total == 1);
  CHECK(first.pairs_evaluated == 1);
  CHECK(first.pairs.size() == 1);
  CHECK(first.corr_pairs.size() == 1);
  CHECK(first.correlations.size() == 1);
  REQUIRE(first.mean_abs.has_value());
  CHECK(first.mean_abs->pearson > 0.8);  // strongly correlated by design

  // the oblique set wins somewhere below 45 degrees, the axis set does not
  CHECK(report.curves[0].final_fraction > 0.0);

  const std::string text = bias_report_to_json(report);
  CHECK(text.find("\"win_at_0.02\"") != std::string::npos);
  CHECK(text.find("\"oblique\"") != std::string::npos);
}

TEST_CASE("bias report runs without the win test") {
  const Dataset a = axis_dataset(120, 48);
  WinTestConfig cfg;
  const auto report = build_bias_report({a}, cfg, false);
  REQUIRE(report.datasets.size() == 1);
  CHECK(report.curves.empty());
  CHECK(report.datasets[0].pairs.empty());
  CHECK(report.datasets[0].correlations.size() == 1);
}

}  // TEST_SUITE
