#include "treelab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "treelab/error.hpp"
#include "treelab/rng.hpp"

namespace treelab {

ClassDistribution ClassDistribution::from_counts(
    const std::vector<std::int64_t>& counts) {
  std::int64_t total = std::accumulate(counts.begin(), counts.end(),
                                       std::int64_t{0});
  if (total <= 0) throw MathError("ClassDistribution: empty node");
  ClassDistribution dist;
  dist.p.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    dist.p[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  return dist;
}

int ClassDistribution::argmax() const {
  int best = 0;
  for (std::size_t k = 1; k < p.size(); ++k)
    if (p[k] > p[best]) best = static_cast<int>(k);
  return best;
}

std::vector<std::int64_t> Dataset::class_counts() const {
  std::vector<std::int64_t> counts(class_names.size(), 0);
  for (int y : labels) counts[static_cast<std::size_t>(y)]++;
  return counts;
}

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1)
    throw DataError("Dataset '" + name + "': empty feature matrix");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw DataError("Dataset '" + name + "': label/row count mismatch");
  if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw DataError("Dataset '" + name + "': feature name count mismatch");
  if (class_names.empty())
    throw DataError("Dataset '" + name + "': no classes");
  for (int y : labels)
    if (y < 0 || y >= n_classes())
      throw DataError("Dataset '" + name + "': label id out of range");
  if (!features.allFinite())
    throw DataError("Dataset '" + name + "': non-finite feature value");
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels[i] = labels[static_cast<std::size_t>(rows[i])];
  }
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.name = name;
  return out;
}

Dataset z_score_normalize(const Dataset& d,
                          std::vector<std::string>* warnings) {
  d.validate();
  const Eigen::Index n = d.n_rows();
  const Eigen::Index m = d.n_features();

  std::vector<Eigen::Index> kept;
  Eigen::VectorXd mean(m), stdev(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    mean(j) = d.features.col(j).mean();
    double ss = (d.features.col(j).array() - mean(j)).square().sum();
    stdev(j) = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    if (stdev(j) > 0.0) {
      kept.push_back(j);
    } else if (warnings) {
      warnings->push_back("dropping constant feature column '" +
                          d.feature_names[static_cast<std::size_t>(j)] + "'");
    }
  }
  if (kept.empty())
    throw DataError("z_score_normalize: all feature columns are constant");

  Dataset out;
  out.features.resize(n, static_cast<Eigen::Index>(kept.size()));
  out.feature_names.reserve(kept.size());
  for (std::size_t jj = 0; jj < kept.size(); ++jj) {
    const Eigen::Index j = kept[jj];
    out.features.col(static_cast<Eigen::Index>(jj)) =
        (d.features.col(j).array() - mean(j)) / stdev(j);
    out.feature_names.push_back(d.feature_names[static_cast<std::size_t>(j)]);
  }
  out.labels = d.labels;
  out.class_names = d.class_names;
  out.name = d.name;
  return out;
}

std::pair<Dataset, Dataset> stratified_split(
    const Dataset& d, double test_fraction, std::uint64_t seed,
    std::vector<std::string>* warnings) {
  d.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("stratified_split: test_fraction must be in (0, 1)");

  const int n_classes = d.n_classes();
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    by_class[static_cast<std::size_t>(d.labels[i])].push_back(
        static_cast<int>(i));

  // Largest-remainder allocation of the total test size across classes.
  const auto n = static_cast<double>(d.n_rows());
  auto total_test =
      static_cast<std::int64_t>(std::nearbyint(n * test_fraction));
  std::vector<std::int64_t> take(static_cast<std::size_t>(n_classes), 0);
  std::vector<std::pair<double, int>> remainders;  // (-frac, class)
  std::int64_t allocated = 0;
  for (int c = 0; c < n_classes; ++c) {
    const auto cc = static_cast<double>(by_class[static_cast<std::size_t>(c)].size());
    const double target = cc * test_fraction;
    take[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(std::floor(target));
    allocated += take[static_cast<std::size_t>(c)];
    remainders.emplace_back(-(target - std::floor(target)), c);
  }
  std::sort(remainders.begin(), remainders.end());
  for (auto& [neg_frac, c] : remainders) {
    if (allocated >= total_test) break;
    const auto cc = static_cast<std::int64_t>(by_class[static_cast<std::size_t>(c)].size());
    if (take[static_cast<std::size_t>(c)] < cc) {
      take[static_cast<std::size_t>(c)]++;
      allocated++;
    }
  }

  std::vector<int> train_rows, test_rows;
  for (int c = 0; c < n_classes; ++c) {
    auto& rows = by_class[static_cast<std::size_t>(c)];
    if (rows.empty()) continue;
    if (rows.size() == 1) {
      if (warnings)
        warnings->push_back("class '" + d.class_names[static_cast<std::size_t>(c)] +
                            "' has a single instance; kept in training");
      train_rows.push_back(rows[0]);
      continue;
    }
    Rng rng(derive_seed(seed, {0x5354524154ULL, static_cast<std::uint64_t>(c)}));
    rng.shuffle(rows);
    const auto k = static_cast<std::size_t>(take[static_cast<std::size_t>(c)]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      (i < k ? test_rows : train_rows).push_back(rows[i]);
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  if (train_rows.empty())
    throw DataError("stratified_split: empty training partition");

  return {d.subset(train_rows), d.subset(test_rows)};
}

namespace {

bool parse_double(const std::string& cell, double* out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' ||
                         *(end - 1) == '\r'))
    --end;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end && std::isfinite(*out);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Dataset read_csv(const std::string& path, const std::string& label_column,
                 std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("read_csv: cannot open '" + path + "'");

  std::string header_line;
  if (!std::getline(in, header_line) || trim(header_line).empty())
    throw DataError("read_csv: '" + path + "' is empty");
  const std::vector<std::string> header = split_line(header_line);

  int label_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (trim(header[j]) == label_column) label_idx = static_cast<int>(j);
  if (label_idx < 0)
    throw DataError("read_csv: label column '" + label_column +
                    "' not found in '" + path + "'");

  std::vector<std::vector<std::string>> raw_rows;
  std::string line;
  std::size_t malformed_width = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      malformed_width++;
      continue;
    }
    raw_rows.push_back(std::move(cells));
  }
  if (raw_rows.empty())
    throw DataError("read_csv: '" + path + "' has no data rows");

  // A feature column is numeric when at least one of its cells parses; columns
  // where nothing parses are treated as string-typed and dropped.
  const std::size_t width = header.size();
  std::vector<bool> numeric(width, false);
  double v;
  for (std::size_t j = 0; j < width; ++j) {
    if (static_cast<int>(j) == label_idx) continue;
    for (const auto& row : raw_rows)
      if (parse_double(row[j], &v)) {
        numeric[j] = true;
        break;
      }
  }
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < width; ++j) {
    if (static_cast<int>(j) == label_idx) continue;
    if (numeric[j]) {
      feature_cols.push_back(j);
    } else if (warnings) {
      warnings->push_back("dropping non-numeric column '" + trim(header[j]) +
                          "'");
    }
  }
  if (feature_cols.empty())
    throw DataError("read_csv: no numeric feature columns in '" + path + "'");

  std::vector<std::vector<double>> values;
  std::vector<std::string> label_text;
  std::size_t rejected = 0;
  for (const auto& row : raw_rows) {
    std::vector<double> parsed(feature_cols.size());
    bool ok = true;
    for (std::size_t jj = 0; jj < feature_cols.size(); ++jj) {
      if (!parse_double(row[feature_cols[jj]], &parsed[jj])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      rejected++;
      continue;
    }
    values.push_back(std::move(parsed));
    label_text.push_back(trim(row[static_cast<std::size_t>(label_idx)]));
  }
  if ((rejected > 0 || malformed_width > 0) && warnings)
    warnings->push_back("rejected " + std::to_string(rejected + malformed_width) +
                        " row(s) with unparseable cells");
  if (values.empty())
    throw DataError("read_csv: every row of '" + path + "' was rejected");

  Dataset d;
  d.name = path;
  if (auto slash = d.name.find_last_of('/'); slash != std::string::npos)
    d.name = d.name.substr(slash + 1);
  if (auto dot = d.name.find_last_of('.'); dot != std::string::npos)
    d.name = d.name.substr(0, dot);
  for (std::size_t jj = 0; jj < feature_cols.size(); ++jj)
    d.feature_names.push_back(trim(header[feature_cols[jj]]));

  // Class ids in order of first appearance.
  d.labels.reserve(label_text.size());
  for (const auto& text : label_text) {
    int id = -1;
    for (std::size_t k = 0; k < d.class_names.size(); ++k)
      if (d.class_names[k] == text) id = static_cast<int>(k);
    if (id < 0) {
      id = static_cast<int>(d.class_names.size());
      d.class_names.push_back(text);
    }
    d.labels.push_back(id);
  }

  d.features.resize(static_cast<Eigen::Index>(values.size()),
                    static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t jj = 0; jj < feature_cols.size(); ++jj)
      d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) =
          values[i][jj];
  d.validate();
  return d;
}

void write_csv(const Dataset& d, const std::string& path,
               const std::string& label_column) {
  d.validate();
  std::ofstream out(path);
  if (!out) throw DataError("write_csv: cannot open '" + path + "'");

  for (const auto& fname : d.feature_names) out << fname << ",";
  out << label_column << "\n";

  char buf[64];
  for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
    for (Eigen::Index j = 0; j < d.n_features(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.features(i, j));
      out << buf << ",";
    }
    out << d.class_names[static_cast<std::size_t>(
               d.labels[static_cast<std::size_t>(i)])]
        << "\n";
  }
  if (!out) throw DataError("write_csv: write failed for '" + path + "'");

  nlohmann::json meta;
  meta["name"] = d.name;
  meta["label_column"] = label_column;
  meta["feature_names"] = d.feature_names;
  meta["class_names"] = d.class_names;
  meta["n_rows"] = d.n_rows();
  std::ofstream mout(path + ".meta.json");
  mout << meta.dump(2) << "\n";
}

Dataset binarize_majority_vs_rest(const Dataset& d,
                                  std::vector<std::string>* warnings) {
  d.validate();
  if (d.n_classes() <= 2) return d;

  const auto counts = d.class_counts();
  int majority = 0;
  for (int c = 1; c < d.n_classes(); ++c)
    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(majority)])
      majority = c;

  Dataset out = d;
  out.class_names = {d.class_names[static_cast<std::size_t>(majority)],
                     "rest"};
  for (auto& y : out.labels) y = (y == majority) ? 0 : 1;
  if (warnings)
    warnings->push_back("binarized " + std::to_string(d.n_classes()) +
                        "-class dataset '" + d.name + "' as '" +
                        d.class_names[static_cast<std::size_t>(majority)] +
                        "' vs rest");
  return out;
}

int minority_class(const Dataset& d) {
  const auto counts = d.class_counts();
  int best = 0;
  for (int c = 1; c < d.n_classes(); ++c)
    if (counts[static_cast<std::size_t>(c)] < counts[static_cast<std::size_t>(best)])
      best = c;
  return best;
}

}  // namespace treelab
