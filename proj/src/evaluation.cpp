#include "treelab/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "treelab/diagnostics.hpp"
#include "treelab/error.hpp"
#include "treelab/rng.hpp"

namespace treelab::evaluation {
namespace {

constexpr std::uint64_t kSplitStream = 0x73706c69;
constexpr std::uint64_t kGrowStream = 0x67726f77;
constexpr std::uint64_t kCellStream = 0x63656c6c;

const double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

void check_pred_sizes(const std::vector<int>& y_true,
                      const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw DataError("metrics: prediction/label lengths differ");
  if (y_true.empty()) throw DataError("metrics: empty input");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields;
}

double parse_double_field(const std::string& s) {
  if (s == "nan" || s == "-nan") return kNan;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError("results csv: bad numeric field '" + s + "'");
  return v;
}

std::int64_t parse_int_field(const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError("results csv: bad integer field '" + s + "'");
  return v;
}

std::uint64_t parse_uint_field(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError("results csv: bad seed field '" + s + "'");
  return v;
}

std::string cell_key(const std::string& dataset, TreeFamily family,
                     std::uint64_t seed, int depth) {
  return dataset + "," + tree_family_name(family) + "," +
         std::to_string(seed) + "," + std::to_string(depth);
}

std::vector<double> positive_scores(const DecisionTree& tree,
                                    const Eigen::MatrixXd& X, int positive) {
  std::vector<double> scores(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    scores[static_cast<std::size_t>(i)] =
        tree.predict_proba(X.row(i)).p[static_cast<std::size_t>(positive)];
  return scores;
}

MetricsRecord score_partition(const DecisionTree& tree, const Dataset& part,
                              int positive, const std::string& tag) {
  MetricsRecord r;
  r.split = tag;
  const auto pred = tree.predict(part.features);
  r.acc = accuracy(part.labels, pred);
  if (positive >= 0) {
    r.f1 = f1_score(part.labels, pred, positive);
    const auto scores = positive_scores(tree, part.features, positive);
    try {
      r.auc = auc_roc(part.labels, scores, positive);
    } catch (const MathError&) {
      r.auc = kNan;
    }
    try {
      r.ap = average_precision(part.labels, scores, positive);
    } catch (const MathError&) {
      r.ap = kNan;
    }
  } else {
    r.f1 = f1_macro(part.labels, pred, part.n_classes());
    r.auc = kNan;
    r.ap = kNan;
  }
  r.tree_size = tree.tree_size();
  try {
    r.nonzero_ratio = tree.nonzero_ratio();
  } catch (const MathError&) {
    r.nonzero_ratio = kNan;
  }
  return r;
}

struct Cell {
  Dataset data;             // empty features when synthetic (generated lazily)
  SyntheticSpec synth;      // valid when `is_synthetic`
  bool is_synthetic = false;
  TreeFamily family = TreeFamily::Univariate;
  int depth = 0;
  std::uint64_t cell_seed = 0;
  std::uint64_t record_seed = 0;
};

struct CellOutput {
  std::vector<MetricsRecord> records;
  std::string failure;  // non-empty on error
};

RunSummary run_cells(std::vector<Cell> cells, const ExperimentConfig& cfg,
                     const std::filesystem::path& results_csv) {
  RunSummary summary;
  summary.cells_total = cells.size();

  std::set<std::string> done_keys;
  if (std::filesystem::exists(results_csv)) {
    std::map<std::string, std::set<std::string>> splits_seen;
    for (const auto& r : read_results_csv(results_csv))
      splits_seen[cell_key(r.dataset, r.family, r.seed, r.depth)].insert(
          r.split);
    for (const auto& [key, splits] : splits_seen)
      if (splits.count("train") && splits.count("test")) done_keys.insert(key);
  }

  std::vector<Cell> pending;
  for (auto& cell : cells) {
    const std::string name =
        cell.is_synthetic ? cell.synth.dataset_name() : cell.data.name;
    if (done_keys.count(
            cell_key(name, cell.family, cell.record_seed, cell.depth))) {
      ++summary.cells_skipped;
    } else {
      pending.push_back(std::move(cell));
    }
  }

  std::vector<CellOutput> outputs(pending.size());
  std::atomic<std::size_t> next{0};
  const int jobs = std::max(1, cfg.jobs);
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) break;
      const Cell& cell = pending[k];
      try {
        const Dataset d =
            cell.is_synthetic ? generate(cell.synth) : cell.data;
        auto [train_rec, test_rec] = evaluate_cell(
            d, cell.family, cell.depth, cfg, cell.cell_seed, cell.record_seed);
        outputs[k].records = {std::move(train_rec), std::move(test_rec)};
      } catch (const std::exception& e) {
        const std::string name =
            cell.is_synthetic ? cell.synth.dataset_name() : cell.data.name;
        outputs[k].failure = name + " (" + tree_family_name(cell.family) +
                             ", depth " + std::to_string(cell.depth) +
                             "): " + e.what();
      }
    }
  };
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  const bool need_header = !std::filesystem::exists(results_csv) ||
                           std::filesystem::file_size(results_csv) == 0;
  std::ofstream out(results_csv, std::ios::app);
  if (!out)
    throw DataError("cannot open " + results_csv.string() + " for append");
  if (need_header) out << results_csv_header() << '\n';
  for (auto& output : outputs) {
    if (!output.failure.empty()) {
      ++summary.cells_failed;
      summary.failures.push_back(std::move(output.failure));
      continue;
    }
    for (const auto& r : output.records) out << to_csv_row(r) << '\n';
    ++summary.cells_done;
  }
  out.flush();
  if (!out) throw DataError("write failure on " + results_csv.string());
  return summary;
}

}  // namespace

double accuracy(const std::vector<int>& y_true,
                const std::vector<int>& y_pred) {
  check_pred_sizes(y_true, y_pred);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    correct += y_true[i] == y_pred[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(y_true.size());
}

double f1_score(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                int positive_class) {
  check_pred_sizes(y_true, y_pred);
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == positive_class;
    const bool p = y_pred[i] == positive_class;
    tp += t && p ? 1 : 0;
    fp += !t && p ? 1 : 0;
    fn += t && !p ? 1 : 0;
  }
  const double precision =
      tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                  : 0.0;
  const double recall =
      tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                  : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double f1_macro(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                int num_classes) {
  check_pred_sizes(y_true, y_pred);
  if (num_classes < 1) throw DataError("metrics: need at least one class");
  double sum = 0.0;
  for (int c = 0; c < num_classes; ++c) sum += f1_score(y_true, y_pred, c);
  return sum / static_cast<double>(num_classes);
}

double auc_roc(const std::vector<int>& y_true,
               const std::vector<double>& scores, int positive_class) {
  if (y_true.size() != scores.size())
    throw DataError("metrics: score/label lengths differ");
  if (y_true.empty()) throw DataError("metrics: empty input");
  std::int64_t n_pos = 0;
  for (int c : y_true) n_pos += c == positive_class ? 1 : 0;
  const std::int64_t n_neg = static_cast<std::int64_t>(y_true.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw MathError("auc undefined with a single class");
  const auto ranks = diagnostics::average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (y_true[i] == positive_class) rank_sum += ranks[i];
  const double u = rank_sum - static_cast<double>(n_pos) *
                                  (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double average_precision(const std::vector<int>& y_true,
                         const std::vector<double>& scores,
                         int positive_class) {
  if (y_true.size() != scores.size())
    throw DataError("metrics: score/label lengths differ");
  if (y_true.empty()) throw DataError("metrics: empty input");
  std::int64_t n_pos = 0;
  for (int c : y_true) n_pos += c == positive_class ? 1 : 0;
  if (n_pos == 0 || n_pos == static_cast<std::int64_t>(y_true.size()))
    throw MathError("average precision undefined with a single class");

  std::vector<std::size_t> order(y_true.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  double sum = 0.0;
  std::int64_t seen_pos = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (y_true[order[k]] != positive_class) continue;
    ++seen_pos;
    sum += static_cast<double>(seen_pos) / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(n_pos);
}

TTestResult paired_t_test(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DataError("paired t test: input lengths differ");
  const std::size_t n = a.size();
  if (n < 2) throw DataError("paired t test: need at least 2 pairs");

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double mean =
      std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double var = ss / static_cast<double>(n - 1);
  if (var == 0.0)
    throw MathError("paired t test degenerate: zero variance of differences");

  TTestResult result;
  result.mean_diff = mean;
  result.t_stat = mean / std::sqrt(var / static_cast<double>(n));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  result.p_value =
      2.0 * boost::math::cdf(boost::math::complement(dist,
                                                     std::abs(result.t_stat)));
  return result;
}

const char* group_label_name(GroupLabel label) {
  switch (label) {
    case GroupLabel::MdtLeads: return "mdt_leads";
    case GroupLabel::Comparable: return "comparable";
    case GroupLabel::UdtLeads: return "udt_leads";
  }
  throw ConfigError("unknown group label");
}

std::vector<GroupLabel> group_partition(const std::vector<double>& gaps,
                                        bool zero_centered) {
  const std::size_t n = gaps.size();
  if (n < 2) throw DataError("group partition: need at least 2 datasets");
  const double mean =
      std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double g : gaps) ss += (g - mean) * (g - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(n - 1));
  const double center = zero_centered ? 0.0 : mean;

  std::vector<GroupLabel> labels(n, GroupLabel::Comparable);
  if (sigma == 0.0) return labels;
  for (std::size_t i = 0; i < n; ++i) {
    if (gaps[i] <= center - sigma)
      labels[i] = GroupLabel::MdtLeads;
    else if (gaps[i] >= center + sigma)
      labels[i] = GroupLabel::UdtLeads;
  }
  return labels;
}

std::string results_csv_header() {
  return "dataset,family,seed,depth,split,acc,f1,auc,ap,tree_size,"
         "nonzero_ratio";
}

std::string to_csv_row(const MetricsRecord& r) {
  if (r.dataset.find(',') != std::string::npos)
    throw DataError("results csv: dataset name contains a comma");
  std::ostringstream out;
  out << r.dataset << ',' << tree_family_name(r.family) << ',' << r.seed << ','
      << r.depth << ',' << r.split << ',' << format_double(r.acc) << ','
      << format_double(r.f1) << ',' << format_double(r.auc) << ','
      << format_double(r.ap) << ',' << r.tree_size << ','
      << format_double(r.nonzero_ratio);
  return out.str();
}

std::vector<MetricsRecord> read_results_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<MetricsRecord> records;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != results_csv_header())
        throw DataError("results csv: unexpected header in " + path.string());
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 11)
      throw DataError("results csv: expected 11 fields, got " +
                      std::to_string(fields.size()));
    MetricsRecord r;
    r.dataset = fields[0];
    const auto family = tree_family_from_name(fields[1]);
    if (!family) throw DataError("results csv: unknown family " + fields[1]);
    r.family = *family;
    r.seed = parse_uint_field(fields[2]);
    r.depth = static_cast<int>(parse_int_field(fields[3]));
    r.split = fields[4];
    if (r.split != "train" && r.split != "test")
      throw DataError("results csv: unknown split tag " + r.split);
    r.acc = parse_double_field(fields[5]);
    r.f1 = parse_double_field(fields[6]);
    r.auc = parse_double_field(fields[7]);
    r.ap = parse_double_field(fields[8]);
    r.tree_size = parse_int_field(fields[9]);
    r.nonzero_ratio = parse_double_field(fields[10]);
    records.push_back(std::move(r));
  }
  return records;
}

int positive_class_of(const Dataset& d) {
  if (d.n_classes() != 2) return -1;
  for (int c = 0; c < 2; ++c)
    if (d.class_names[static_cast<std::size_t>(c)] == "1") return c;
  return minority_class(d);
}

void ExperimentConfig::validate() const {
  if (families.empty()) throw ConfigError("experiment: no families selected");
  if (depths.empty()) throw ConfigError("experiment: no depths selected");
  for (int depth : depths)
    if (depth < 0) throw ConfigError("experiment: negative depth");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("experiment: test_fraction must be in (0, 1)");
  if (runs < 1) throw ConfigError("experiment: runs must be >= 1");
  if (jobs < 1) throw ConfigError("experiment: jobs must be >= 1");
  growth.solver.validate();
}

std::pair<MetricsRecord, MetricsRecord> evaluate_cell(
    const Dataset& d, TreeFamily family, int depth, const ExperimentConfig& cfg,
    std::uint64_t cell_seed, std::uint64_t record_seed) {
  cfg.validate();
  d.validate();
  const Dataset work = cfg.z_score ? z_score_normalize(d) : d;
  auto [train, test] =
      stratified_split(work, cfg.test_fraction,
                       derive_seed(cell_seed, {kSplitStream}));

  GrowthConfig growth = cfg.growth;
  growth.family = family;
  growth.max_depth = depth;
  growth.seed = derive_seed(
      cell_seed,
      {kGrowStream, family == TreeFamily::Univariate ? 0ULL : 1ULL});
  const DecisionTree tree = DecisionTree::fit(train, growth);

  const int positive = positive_class_of(work);
  MetricsRecord train_rec = score_partition(tree, train, positive, "train");
  MetricsRecord test_rec = score_partition(tree, test, positive, "test");
  for (MetricsRecord* r : {&train_rec, &test_rec}) {
    r->dataset = d.name;
    r->family = family;
    r->seed = record_seed;
    r->depth = depth;
  }
  return {std::move(train_rec), std::move(test_rec)};
}

RunSummary run_on_datasets(const std::vector<Dataset>& datasets,
                           const ExperimentConfig& cfg,
                           const std::filesystem::path& results_csv) {
  cfg.validate();
  if (datasets.empty()) throw DataError("experiment: no datasets");
  std::vector<Cell> cells;
  for (const Dataset& d : datasets) {
    d.validate();
    for (int depth : cfg.depths) {
      for (int run = 0; run < cfg.runs; ++run) {
        const std::uint64_t base = derive_seed(
            cfg.seed, {kCellStream, fnv1a(d.name),
                       static_cast<std::uint64_t>(depth),
                       static_cast<std::uint64_t>(run)});
        for (TreeFamily family : cfg.families) {
          Cell cell;
          cell.data = d;
          cell.family = family;
          cell.depth = depth;
          cell.cell_seed = base;
          cell.record_seed = static_cast<std::uint64_t>(run);
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return run_cells(std::move(cells), cfg, results_csv);
}

RunSummary run_synthetic_sweep(const GridSpec& grid_spec,
                               const ExperimentConfig& cfg,
                               const std::filesystem::path& results_csv) {
  cfg.validate();
  const auto specs = grid(grid_spec);
  std::vector<Cell> cells;
  cells.reserve(specs.size() * cfg.depths.size() * cfg.families.size());
  for (const SyntheticSpec& spec : specs) {
    for (int depth : cfg.depths) {
      const std::uint64_t base = derive_seed(
          cfg.seed, {kCellStream, fnv1a(spec.dataset_name()),
                     static_cast<std::uint64_t>(depth)});
      for (TreeFamily family : cfg.families) {
        Cell cell;
        cell.synth = spec;
        cell.is_synthetic = true;
        cell.family = family;
        cell.depth = depth;
        cell.cell_seed = base;
        cell.record_seed = spec.seed;
        cells.push_back(std::move(cell));
      }
    }
  }
  return run_cells(std::move(cells), cfg, results_csv);
}

std::vector<AggregateRow> aggregate_synthetic(
    const std::vector<MetricsRecord>& records) {
  struct Key {
    int depth;
    std::string split;
    std::string metric;
    double theta, rho, epsilon;
    TreeFamily family;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : records) {
    const auto spec = parse_dataset_name(r.dataset);
    if (!spec) continue;
    const std::pair<const char*, double> metrics[] = {
        {"acc", r.acc},
        {"f1", r.f1},
        {"auc", r.auc},
        {"ap", r.ap},
        {"tree_size", static_cast<double>(r.tree_size)},
        {"nonzero_ratio", r.nonzero_ratio},
    };
    for (const auto& [metric, value] : metrics) {
      if (std::isnan(value)) continue;
      groups[Key{r.depth, r.split, metric, spec->theta_deg, spec->rho,
                 spec->epsilon, r.family}]
          .push_back(value);
    }
  }
  std::vector<AggregateRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, values] : groups) {
    AggregateRow row;
    row.depth = key.depth;
    row.split = key.split;
    row.metric = key.metric;
    row.theta = key.theta;
    row.rho = key.rho;
    row.epsilon = key.epsilon;
    row.family = key.family;
    row.n = static_cast<int>(values.size());
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) /
        static_cast<double>(values.size());
    row.mean = mean;
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      row.stdev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string aggregates_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "depth,split,metric,theta,rho,epsilon,family,mean,stdev,n\n";
  for (const auto& r : rows) {
    out << r.depth << ',' << r.split << ',' << r.metric << ','
        << format_double(r.theta) << ',' << format_double(r.rho) << ','
        << format_double(r.epsilon) << ',' << tree_family_name(r.family) << ','
        << format_double(r.mean) << ',' << format_double(r.stdev) << ',' << r.n
        << '\n';
  }
  return out.str();
}

std::vector<FamilyComparison> compare_families(
    const std::vector<MetricsRecord>& records, int depth,
    const std::string& split) {
  std::map<std::pair<std::string, std::uint64_t>,
           std::pair<const MetricsRecord*, const MetricsRecord*>>
      aligned;
  for (const auto& r : records) {
    if (r.depth != depth || r.split != split) continue;
    auto& slot = aligned[{r.dataset, r.seed}];
    if (r.family == TreeFamily::Univariate)
      slot.first = &r;
    else
      slot.second = &r;
  }

  const std::pair<const char*, double MetricsRecord::*> metrics[] = {
      {"acc", &MetricsRecord::acc},
      {"f1", &MetricsRecord::f1},
      {"auc", &MetricsRecord::auc},
      {"ap", &MetricsRecord::ap},
  };
  std::vector<FamilyComparison> out;
  for (const auto& [metric, member] : metrics) {
    std::vector<double> udt, mdt;
    for (const auto& [key, pair] : aligned) {
      if (!pair.first || !pair.second) continue;
      const double a = pair.first->*member;
      const double b = pair.second->*member;
      if (std::isnan(a) || std::isnan(b)) continue;
      udt.push_back(a);
      mdt.push_back(b);
    }
    FamilyComparison cmp;
    cmp.metric = metric;
    cmp.n_pairs = udt.size();
    if (!udt.empty()) {
      double sum = 0.0;
      for (std::size_t i = 0; i < udt.size(); ++i) sum += udt[i] - mdt[i];
      cmp.mean_diff = sum / static_cast<double>(udt.size());
    }
    if (udt.size() >= 2) {
      try {
        cmp.test = paired_t_test(udt, mdt);
      } catch (const MathError&) {
        cmp.test = std::nullopt;
      }
    }
    out.push_back(std::move(cmp));
  }
  return out;
}

GroupSummary group_datasets(const std::vector<MetricsRecord>& records,
                            int depth, const std::string& split,
                            bool zero_centered) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      per_dataset;  // dataset -> (udt f1 values, mdt f1 values)
  for (const auto& r : records) {
    if (r.depth != depth || r.split != split) continue;
    if (std::isnan(r.f1)) continue;
    auto& slot = per_dataset[r.dataset];
    if (r.family == TreeFamily::Univariate)
      slot.first.push_back(r.f1);
    else
      slot.second.push_back(r.f1);
  }

  GroupSummary summary;
  for (const auto& [name, values] : per_dataset) {
    const auto& [udt, mdt] = values;
    if (udt.empty() || mdt.empty()) continue;
    const double mu =
        std::accumulate(udt.begin(), udt.end(), 0.0) /
        static_cast<double>(udt.size());
    const double mm =
        std::accumulate(mdt.begin(), mdt.end(), 0.0) /
        static_cast<double>(mdt.size());
    summary.dataset.push_back(name);
    summary.gap.push_back(mu - mm);
  }
  summary.label = group_partition(summary.gap, zero_centered);
  return summary;
}

}  // namespace treelab::evaluation
