#include "treelab/synthgen.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "treelab/error.hpp"
#include "treelab/rng.hpp"

namespace treelab {
namespace {

constexpr std::uint64_t kFeatureStream = 0x66656174;
constexpr std::uint64_t kFlipStream = 0x666c6970;
constexpr std::uint64_t kGridStream = 0x67726964;

std::string trimmed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

bool parse_double_until(const std::string& s, std::size_t& pos,
                        const std::string& stop, double& out) {
  const std::size_t end = s.find(stop, pos);
  if (end == std::string::npos) return false;
  const char* first = s.data() + pos;
  const char* last = s.data() + end;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) return false;
  pos = end + stop.size();
  return true;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw ConfigError("synth: rho must be in [0, 1]");
  if (!(theta_deg >= 0.0 && theta_deg < 90.0))
    throw ConfigError("synth: theta must be in [0, 90) degrees");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ConfigError("synth: epsilon must be in [0, 1]");
  if (n < 1) throw ConfigError("synth: n must be >= 1");
}

std::string SyntheticSpec::dataset_name() const {
  return "synth_theta" + trimmed(theta_deg) + "_rho" + trimmed(rho) + "_eps" +
         trimmed(epsilon) + "_seed" + std::to_string(seed);
}

std::optional<SyntheticSpec> parse_dataset_name(const std::string& name) {
  const std::string prefix = "synth_theta";
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  std::size_t pos = prefix.size();
  SyntheticSpec spec;
  if (!parse_double_until(name, pos, "_rho", spec.theta_deg))
    return std::nullopt;
  if (!parse_double_until(name, pos, "_eps", spec.rho)) return std::nullopt;
  if (!parse_double_until(name, pos, "_seed", spec.epsilon))
    return std::nullopt;
  const char* first = name.data() + pos;
  const char* last = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(first, last, spec.seed);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  try {
    spec.validate();
  } catch (const ConfigError&) {
    return std::nullopt;
  }
  return spec;
}

Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, {kFeatureStream}));
  const double shrink = std::sqrt(1.0 - spec.rho * spec.rho);
  const double slope = std::tan(spec.theta_deg * std::numbers::pi / 180.0);

  Dataset d;
  d.name = spec.dataset_name();
  d.features.resize(spec.n, 2);
  d.labels.resize(static_cast<std::size_t>(spec.n));
  d.feature_names = {"x1", "x2"};
  d.class_names = {"0", "1"};
  for (int i = 0; i < spec.n; ++i) {
    const double x1 = rng.normal();
    const double z = rng.normal();
    const double x2 = spec.rho * x1 + shrink * z;
    d.features(i, 0) = x1;
    d.features(i, 1) = x2;
    d.labels[static_cast<std::size_t>(i)] = x2 > slope * x1 ? 1 : 0;
  }
  d.labels = flip_labels(d.labels, spec.epsilon,
                         derive_seed(spec.seed, {kFlipStream}));
  d.validate();
  return d;
}

std::vector<int> flip_labels(const std::vector<int>& y, double epsilon,
                             std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ConfigError("flip_labels: epsilon must be in [0, 1]");
  Rng rng(seed);
  std::vector<int> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int label = y[i];
    if (label != 0 && label != 1)
      throw DataError("flip_labels: labels must be binary");
    out[i] = rng.bernoulli(epsilon) ? 1 - label : label;
  }
  return out;
}

std::vector<SyntheticSpec> grid(const GridSpec& g) {
  if (g.replicates < 1) throw ConfigError("grid: replicates must be >= 1");
  if (g.n < 1) throw ConfigError("grid: n must be >= 1");
  std::vector<SyntheticSpec> specs;
  specs.reserve(static_cast<std::size_t>(g.replicates) * g.thetas.size() *
                g.rhos.size() * g.epsilons.size());
  for (int rep = 0; rep < g.replicates; ++rep) {
    for (std::size_t ti = 0; ti < g.thetas.size(); ++ti) {
      for (std::size_t ri = 0; ri < g.rhos.size(); ++ri) {
        // The seed ignores epsilon so the noise variants of a grid cell
        // share their feature draw and differ only in flipped labels.
        const std::uint64_t seed = derive_seed(
            g.master_seed,
            {kGridStream, static_cast<std::uint64_t>(rep),
             static_cast<std::uint64_t>(ti), static_cast<std::uint64_t>(ri)});
        for (double eps : g.epsilons) {
          SyntheticSpec spec;
          spec.theta_deg = g.thetas[ti];
          spec.rho = g.rhos[ri];
          spec.epsilon = eps;
          spec.n = g.n;
          spec.seed = seed;
          spec.validate();
          specs.push_back(spec);
        }
      }
    }
  }
  return specs;
}

}  // namespace treelab
