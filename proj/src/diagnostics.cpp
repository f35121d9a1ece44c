#include "treelab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <unordered_set>

#include "json.hpp"
#include "treelab/error.hpp"
#include "treelab/rng.hpp"

namespace treelab::diagnostics {
namespace {

constexpr std::uint64_t kSampleStream = 0x70616972;
constexpr std::uint64_t kFitStream = 0x66697473;

void check_sizes(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DataError("correlation: input lengths differ");
  if (x.size() < 2) throw DataError("correlation: need at least 2 points");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::int64_t tie_pairs(std::span<const double> sorted) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const std::int64_t t = static_cast<std::int64_t>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

std::int64_t merge_count(std::vector<double>& a, std::vector<double>& tmp,
                         std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = merge_count(a, tmp, lo, mid) + merge_count(a, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[i] <= a[j]) {
      tmp[k++] = a[i++];
    } else {
      inv += static_cast<std::int64_t>(mid - i);
      tmp[k++] = a[j++];
    }
  }
  while (i < mid) tmp[k++] = a[i++];
  while (j < hi) tmp[k++] = a[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

bool column_constant(const Eigen::MatrixXd& M, Eigen::Index j) {
  return M.col(j).minCoeff() == M.col(j).maxCoeff();
}

std::span<const double> column_span(const Eigen::MatrixXd& M, Eigen::Index j) {
  return {M.col(j).data(), static_cast<std::size_t>(M.rows())};
}

double majority_fraction(const std::vector<int>& y) {
  std::array<std::int64_t, 2> counts{0, 0};
  for (int c : y) ++counts[static_cast<std::size_t>(c)];
  return static_cast<double>(std::max(counts[0], counts[1])) /
         static_cast<double>(y.size());
}

double stump_accuracy(const Eigen::MatrixXd& Xsub, const std::vector<int>& y,
                      const SplitFunction& split) {
  std::array<std::array<std::int64_t, 2>, 2> counts{};
  for (Eigen::Index r = 0; r < Xsub.rows(); ++r) {
    const std::size_t side = split.goes_left(Xsub.row(r)) ? 0 : 1;
    ++counts[side][static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
  }
  const std::int64_t correct = std::max(counts[0][0], counts[0][1]) +
                               std::max(counts[1][0], counts[1][1]);
  return static_cast<double>(correct) / static_cast<double>(Xsub.rows());
}

}  // namespace

const char* correlation_kind_name(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::Pearson: return "pearson";
    case CorrelationKind::Spearman: return "spearman";
    case CorrelationKind::Kendall: return "kendall";
  }
  throw ConfigError("unknown correlation kind");
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_sizes(x, y);
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) /
                    static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) /
                    static_cast<double>(n);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx == 0.0 || vy == 0.0)
    throw MathError("correlation undefined for constant input");
  return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    const double avg = static_cast<double>(i + j + 1) / 2.0;  // 1-based
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_sizes(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_sizes(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  const std::int64_t n0 =
      static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  std::int64_t n1 = 0, n3 = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    const std::int64_t t = static_cast<std::int64_t>(j - i);
    n1 += t * (t - 1) / 2;
    std::size_t a = i;
    while (a < j) {
      std::size_t b = a;
      while (b < j && y[idx[b]] == y[idx[a]]) ++b;
      const std::int64_t u = static_cast<std::int64_t>(b - a);
      n3 += u * (u - 1) / 2;
      a = b;
    }
    i = j;
  }

  std::vector<double> ys(n);
  for (std::size_t k = 0; k < n; ++k) ys[k] = y[idx[k]];
  std::vector<double> tmp(n);
  const std::int64_t inversions = merge_count(ys, tmp, 0, n);
  const std::int64_t n2 = tie_pairs(ys);  // ys is sorted now

  if (n0 == n1 || n0 == n2)
    throw MathError("correlation undefined for constant input");
  const double numerator =
      static_cast<double>(n0 - n1 - n2 + n3 - 2 * inversions);
  const double denominator = std::sqrt(static_cast<double>(n0 - n1)) *
                             std::sqrt(static_cast<double>(n0 - n2));
  return std::clamp(numerator / denominator, -1.0, 1.0);
}

double Cdf::operator()(double x) const {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return 0.0;
  return fs[static_cast<std::size_t>(it - xs.begin()) - 1];
}

Cdf make_cdf(std::vector<double> values) {
  Cdf cdf;
  cdf.n = values.size();
  if (values.empty()) return cdf;
  std::sort(values.begin(), values.end());
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    cdf.xs.push_back(values[i]);
    cdf.fs.push_back(static_cast<double>(j) /
                     static_cast<double>(values.size()));
    i = j;
  }
  return cdf;
}

CorrelationCdfs correlation_cdf(const std::vector<Dataset>& datasets,
                                CorrelationKind kind) {
  if (datasets.empty())
    throw DataError("correlation_cdf: need at least one dataset");
  CorrelationCdfs out;
  std::vector<double> pair_values;
  std::vector<double> dataset_means;
  for (const Dataset& d : datasets) {
    d.validate();
    double sum = 0.0;
    std::size_t count = 0;
    for (int i = 0; i + 1 < d.n_features(); ++i) {
      for (int j = i + 1; j < d.n_features(); ++j) {
        if (column_constant(d.features, i) || column_constant(d.features, j)) {
          ++out.skipped_pairs;
          continue;
        }
        const auto cx = column_span(d.features, i);
        const auto cy = column_span(d.features, j);
        double c = 0.0;
        switch (kind) {
          case CorrelationKind::Pearson: c = pearson(cx, cy); break;
          case CorrelationKind::Spearman: c = spearman(cx, cy); break;
          case CorrelationKind::Kendall: c = kendall_tau(cx, cy); break;
        }
        pair_values.push_back(std::abs(c));
        sum += std::abs(c);
        ++count;
      }
    }
    if (count > 0) dataset_means.push_back(sum / static_cast<double>(count));
  }
  out.pair_level = make_cdf(std::move(pair_values));
  out.dataset_level = make_cdf(std::move(dataset_means));
  return out;
}

bool PairResult::wins(double win_margin) const {
  if (degenerate) return false;
  return acc_both > (1.0 + win_margin) * std::max(acc_i, acc_j);
}

std::vector<std::array<int, 2>> all_feature_pairs(int n_features) {
  std::vector<std::array<int, 2>> pairs;
  if (n_features < 2) return pairs;
  pairs.reserve(static_cast<std::size_t>(n_features) *
                static_cast<std::size_t>(n_features - 1) / 2);
  for (int i = 0; i + 1 < n_features; ++i)
    for (int j = i + 1; j < n_features; ++j) pairs.push_back({i, j});
  return pairs;
}

std::vector<std::array<int, 2>> sample_feature_pairs(int n_features,
                                                     std::size_t cap,
                                                     std::uint64_t seed) {
  if (cap == 0) throw ConfigError("sample_feature_pairs: cap must be >= 1");
  const std::uint64_t total =
      static_cast<std::uint64_t>(n_features) *
      static_cast<std::uint64_t>(n_features > 0 ? n_features - 1 : 0) / 2;
  if (total <= cap) return all_feature_pairs(n_features);

  Rng rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(cap * 2);
  while (chosen.size() < cap) chosen.insert(rng.below(total));

  std::vector<std::array<int, 2>> pairs;
  pairs.reserve(cap);
  for (std::uint64_t k : chosen) {
    int i = 0;
    std::uint64_t rest = k;
    while (rest >= static_cast<std::uint64_t>(n_features - 1 - i)) {
      rest -= static_cast<std::uint64_t>(n_features - 1 - i);
      ++i;
    }
    pairs.push_back({i, i + 1 + static_cast<int>(rest)});
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<PairResult> pairwise_win_test(const Dataset& d,
                                          const WinTestConfig& cfg) {
  d.validate();
  cfg.solver.validate();
  if (d.n_features() < 2)
    throw DataError("win test needs at least 2 features");
  if (d.n_classes() != 2)
    throw DataError("win test requires binary labels");

  const std::uint64_t base = derive_seed(cfg.seed, {fnv1a(d.name)});
  const auto pairs =
      sample_feature_pairs(d.n_features(), cfg.sample_cap,
                           derive_seed(base, {kSampleStream}));
  std::vector<int> rows(static_cast<std::size_t>(d.n_rows()));
  std::iota(rows.begin(), rows.end(), 0);
  const double fallback_acc = majority_fraction(d.labels);

  std::vector<PairResult> results;
  results.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    PairResult r;
    r.i = i;
    r.j = j;

    Eigen::MatrixXd Xi = d.features.col(i);
    Eigen::MatrixXd Xj = d.features.col(j);
    Eigen::MatrixXd Xij(d.n_rows(), 2);
    Xij.col(0) = d.features.col(i);
    Xij.col(1) = d.features.col(j);

    const std::uint64_t ks = derive_seed(
        base, {kFitStream, static_cast<std::uint64_t>(i),
               static_cast<std::uint64_t>(j)});
    auto fi = fit_linear_candidate(Xi, d.labels, rows, 2, CandidateKind::SVM,
                                   cfg.solver, derive_seed(ks, {0}));
    auto fj = fit_linear_candidate(Xj, d.labels, rows, 2, CandidateKind::SVM,
                                   cfg.solver, derive_seed(ks, {1}));
    auto fij = fit_linear_candidate(Xij, d.labels, rows, 2, CandidateKind::SVM,
                                    cfg.solver, derive_seed(ks, {2}));

    r.acc_i = fi ? stump_accuracy(Xi, d.labels, fi->split) : fallback_acc;
    r.acc_j = fj ? stump_accuracy(Xj, d.labels, fj->split) : fallback_acc;
    r.acc_both =
        fij ? stump_accuracy(Xij, d.labels, fij->split) : fallback_acc;
    r.degenerate = !fi || !fj || !fij;

    if (fij) {
      const double w1 = fij->split.alpha(0);
      const double w2 = fij->split.alpha(1);
      r.theta_hat_deg =
          w2 == 0.0 ? 90.0
                    : std::atan(-w1 / w2) * 180.0 / std::numbers::pi;
      r.phi_hat_deg = slope_fold(r.theta_hat_deg);
    } else {
      r.theta_hat_deg = std::numeric_limits<double>::quiet_NaN();
      r.phi_hat_deg = std::numeric_limits<double>::quiet_NaN();
    }
    results.push_back(r);
  }
  return results;
}

double slope_fold(double theta_hat_deg) {
  const double a = std::abs(theta_hat_deg);
  if (a > 90.0) throw MathError("slope_fold: angle outside [-90, 90]");
  return std::min(a, 90.0 - a);
}

WinCurve weighted_win_curve(
    const std::vector<std::vector<PairResult>>& per_dataset,
    double win_margin) {
  WinCurve curve;
  curve.phi_deg.resize(46);
  std::iota(curve.phi_deg.begin(), curve.phi_deg.end(), 0.0);
  curve.cumulative.assign(46, 0.0);

  std::size_t used_datasets = 0;
  for (const auto& results : per_dataset) {
    std::size_t usable = 0;
    for (const auto& r : results) usable += r.degenerate ? 0 : 1;
    if (usable == 0) continue;
    ++used_datasets;
    const double weight = 1.0 / static_cast<double>(usable);
    for (const auto& r : results) {
      if (!r.wins(win_margin)) continue;
      const int start = std::max(0, static_cast<int>(std::ceil(r.phi_hat_deg)));
      for (int t = start; t <= 45; ++t)
        curve.cumulative[static_cast<std::size_t>(t)] += weight;
    }
  }
  if (used_datasets > 0)
    for (double& v : curve.cumulative) v /= static_cast<double>(used_datasets);
  curve.final_fraction = curve.cumulative.back();
  return curve;
}

BiasReport build_bias_report(const std::vector<Dataset>& datasets,
                             const WinTestConfig& cfg, bool run_win_test,
                             std::vector<double> win_margins) {
  if (datasets.empty())
    throw DataError("bias report: need at least one dataset");
  BiasReport report;
  report.win_margins = std::move(win_margins);

  std::vector<std::vector<PairResult>> per_dataset;
  for (const Dataset& d : datasets) {
    d.validate();
    BiasReport::PerDataset entry;
    entry.name = d.name;
    entry.n_features = d.n_features();
    entry.pairs_total = static_cast<std::size_t>(d.n_features()) *
                        static_cast<std::size_t>(d.n_features() - 1) / 2;

    const auto corr_pairs = sample_feature_pairs(
        d.n_features(), cfg.sample_cap,
        derive_seed(derive_seed(cfg.seed, {fnv1a(d.name)}), {kSampleStream}));
    double sp = 0.0, ss = 0.0, sk = 0.0;
    for (const auto& [i, j] : corr_pairs) {
      if (column_constant(d.features, i) || column_constant(d.features, j)) {
        ++entry.skipped_correlations;
        continue;
      }
      CorrelationTriple c;
      const auto cx = column_span(d.features, i);
      const auto cy = column_span(d.features, j);
      c.pearson = pearson(cx, cy);
      c.spearman = spearman(cx, cy);
      c.kendall = kendall_tau(cx, cy);
      entry.corr_pairs.push_back({i, j});
      entry.correlations.push_back(c);
      sp += std::abs(c.pearson);
      ss += std::abs(c.spearman);
      sk += std::abs(c.kendall);
    }
    if (!entry.correlations.empty()) {
      const double m = static_cast<double>(entry.correlations.size());
      entry.mean_abs = CorrelationTriple{sp / m, ss / m, sk / m};
    }

    if (run_win_test && d.n_features() >= 2) {
      const Dataset binary =
          d.n_classes() == 2 ? d : binarize_majority_vs_rest(d);
      entry.pairs = pairwise_win_test(binary, cfg);
      entry.pairs_evaluated = entry.pairs.size();
      for (const auto& r : entry.pairs)
        entry.degenerate += r.degenerate ? 1 : 0;
      per_dataset.push_back(entry.pairs);
    }
    report.datasets.push_back(std::move(entry));
  }

  if (run_win_test)
    for (double margin : report.win_margins)
      report.curves.push_back(weighted_win_curve(per_dataset, margin));
  return report;
}

std::string bias_report_to_json(const BiasReport& report) {
  using nlohmann::json;
  json out;
  out["datasets"] = json::array();
  for (const auto& d : report.datasets) {
    json jd{
        {"name", d.name},
        {"n_features", d.n_features},
        {"pairs_total", d.pairs_total},
        {"pairs_evaluated", d.pairs_evaluated},
        {"degenerate", d.degenerate},
        {"skipped_correlations", d.skipped_correlations},
    };
    if (d.mean_abs) {
      jd["mean_abs_correlation"] = {{"pearson", d.mean_abs->pearson},
                                    {"spearman", d.mean_abs->spearman},
                                    {"kendall", d.mean_abs->kendall}};
    }
    json pairs = json::array();
    for (std::size_t k = 0; k < d.pairs.size(); ++k) {
      const auto& r = d.pairs[k];
      json jp{{"i", r.i},
              {"j", r.j},
              {"acc_i", r.acc_i},
              {"acc_j", r.acc_j},
              {"acc_both", r.acc_both},
              {"degenerate", r.degenerate}};
      if (!std::isnan(r.theta_hat_deg)) {
        jp["theta_hat_deg"] = r.theta_hat_deg;
        jp["phi_hat_deg"] = r.phi_hat_deg;
      }
      for (double margin : report.win_margins) {
        char key[32];
        std::snprintf(key, sizeof(key), "win_at_%g", margin);
        jp[key] = r.wins(margin);
      }
      pairs.push_back(std::move(jp));
    }
    jd["pairs"] = std::move(pairs);
    out["datasets"].push_back(std::move(jd));
  }
  out["win_margins"] = report.win_margins;
  out["curves"] = json::array();
  for (std::size_t k = 0; k < report.curves.size(); ++k) {
    const auto& c = report.curves[k];
    json points = json::array();
    for (std::size_t t = 0; t < c.phi_deg.size(); ++t)
      points.push_back(json::array({c.phi_deg[t], c.cumulative[t]}));
    out["curves"].push_back(json{{"win_margin", report.win_margins[k]},
                                 {"points", std::move(points)},
                                 {"final_fraction", c.final_fraction}});
  }
  return out.dump(2);
}

}  // namespace treelab::diagnostics
