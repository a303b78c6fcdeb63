#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "seep/run_export.hpp"

namespace seep {

struct BetaParams {
  double a = 1.0;
  double b = 1.0;
  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

/// Generative description of a synthetic poisoned run.
///
/// Class c is N(class_separation * cluster_std * e_c, cluster_std^2 I). Poison sits at
/// the target centroid + cluster_separation * cluster_std * e_{n_classes} with std
/// poison_std; the first overlap_fraction of poison (in selection order) is instead
/// drawn around the target centroid itself with the same poison_std.
struct SyntheticConfig {
  std::size_t n_instances = 2000;
  std::size_t n_classes = 2;
  std::size_t embed_dim = 16;
  std::size_t n_epochs = 3;
  double poisoning_rate = 0.20;
  double cluster_std = 5.0;
  double poison_std = 0.5;
  double class_separation = 8.0;    // between class centroids, in cluster_std units
  double cluster_separation = 8.0;  // poison centroid to target centroid, in cluster_std units
  double overlap_fraction = 0.0;
  std::uint32_t target_label = 0;
  std::vector<BetaParams> clean_profile{{16, 4}, {16, 4}, {16, 4}};
  std::vector<BetaParams> poison_profile{{20, 1}, {50, 1}, {50, 1}};
  std::uint64_t rng_seed = 0;

  void validate() const;
  friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

/// Insertion-attack geometry: compact, far, overconfident poison.
SyntheticConfig separable_preset(std::uint64_t seed, double rate = 0.20);
/// Mixed-region geometry: 30% of poison inside the target cluster, slower-learned poison.
SyntheticConfig mixed_preset(std::uint64_t seed, double rate = 0.20);
/// Clean data only.
SyntheticConfig benign_preset(std::uint64_t seed);

/// max(1, round(rate * n)) for rate > 0, else 0.
std::size_t poison_count(const SyntheticConfig& config);

struct SyntheticRun {
  RunExport run;
  std::vector<bool> relocated;  // poison drawn inside the target cluster
  std::vector<std::string> warnings;
};

SyntheticRun generate_run(const SyntheticConfig& config);
/// generate_run with poisoning_rate forced to 0.
SyntheticRun benign_run(SyntheticConfig config);

}  // namespace seep
