#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treelab/dataset.hpp"

namespace treelab {

// One synthetic dataset: two correlated standard-normal features and a
// linear decision boundary of slope tan(theta), with optional label noise.
struct SyntheticSpec {
  double rho = 0.0;        // target Pearson correlation of x1, x2
  double theta_deg = 0.0;  // boundary slope angle, degrees in [0, 90)
  double epsilon = 0.0;    // label flip probability
  int n = 1000;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
  std::string dataset_name() const;
};

// Parses names of the form synth_theta{t}_rho{r}_eps{e}_seed{s}; n is not
// recoverable from the name and is left at its default.
std::optional<SyntheticSpec> parse_dataset_name(const std::string& name);

// Draws x1, z i.i.d. N(0,1), sets x2 = rho*x1 + sqrt(1-rho^2)*z, labels
// y = 1 when x2 > tan(theta)*x1 (ties get 0), then flips each label with
// probability epsilon. The flip stream is derived separately from the
// feature stream, so datasets differing only in epsilon share features.
Dataset generate(const SyntheticSpec& spec);

std::vector<int> flip_labels(const std::vector<int>& y, double epsilon,
                             std::uint64_t seed);

struct GridSpec {
  std::vector<double> thetas{0.0, 15.0, 30.0, 45.0};
  std::vector<double> rhos{0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                           0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> epsilons{0.0, 0.1, 0.25};
  int n = 1000;
  int replicates = 20;
  std::uint64_t master_seed = 0;
};

// Full factorial theta x rho x epsilon x replicate grid. Each spec gets a
// seed derived from the master seed and its grid coordinates, so the grid
// is reproducible regardless of generation order.
std::vector<SyntheticSpec> grid(const GridSpec& g);

}  // namespace treelab
