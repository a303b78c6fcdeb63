#include "seep/synth.hpp"

#include <cmath>
#include <numeric>

#include "seep/rng.hpp"

namespace seep {

void SyntheticConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("synthetic config: " + msg); };
  if (n_instances < 1) fail("n_instances must be >= 1");
  if (n_classes < 2) fail("n_classes must be >= 2");
  if (embed_dim < n_classes + 1) fail("embed_dim must exceed n_classes (one axis per class plus the poison axis)");
  if (n_epochs < 1) fail("n_epochs must be >= 1");
  if (!(poisoning_rate >= 0.0 && poisoning_rate <= 1.0)) fail("poisoning_rate must be in [0, 1]");
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 1.0)) fail("overlap_fraction must be in [0, 1]");
  if (!(cluster_separation >= 0.0)) fail("cluster_separation must be >= 0");
  if (!(class_separation >= 0.0)) fail("class_separation must be >= 0");
  if (!(cluster_std > 0.0) || !(poison_std > 0.0)) fail("standard deviations must be positive");
  if (target_label >= n_classes) fail("target_label must be < n_classes");
  if (clean_profile.size() != n_epochs || poison_profile.size() != n_epochs) {
    fail("confidence profiles need one Beta(a, b) per epoch");
  }
  for (const auto* prof : {&clean_profile, &poison_profile}) {
    for (const auto& p : *prof) {
      if (!(p.a > 0.0) || !(p.b > 0.0)) fail("Beta parameters must be positive");
    }
  }
}

SyntheticConfig separable_preset(std::uint64_t seed, double rate) {
  SyntheticConfig c;
  c.rng_seed = seed;
  c.poisoning_rate = rate;
  return c;
}

SyntheticConfig mixed_preset(std::uint64_t seed, double rate) {
  SyntheticConfig c = separable_preset(seed, rate);
  c.overlap_fraction = 0.3;
  c.poison_profile = {{2, 3}, {4, 2}, {6, 0.4}};
  return c;
}

SyntheticConfig benign_preset(std::uint64_t seed) { return separable_preset(seed, 0.0); }

std::size_t poison_count(const SyntheticConfig& config) {
  if (config.poisoning_rate <= 0.0) return 0;
  const double raw = config.poisoning_rate * static_cast<double>(config.n_instances);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(raw)));
}

SyntheticRun generate_run(const SyntheticConfig& config) {
  config.validate();
  const std::size_t n = config.n_instances;
  const std::size_t d = config.embed_dim;
  const std::size_t classes = config.n_classes;
  Rng rng(config.rng_seed);

  SyntheticRun out;
  const std::size_t n_poison = poison_count(config);
  if (config.poisoning_rate > 0.0 && config.poisoning_rate * static_cast<double>(n) < 1.0) {
    out.warnings.push_back("poisoning_rate * n_instances < 1; generating 1 poisoned instance");
  }

  // Partial Fisher-Yates: the first n_poison slots are the poisoned instances, in draw order.
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  for (std::size_t i = 0; i < n_poison; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(perm[i], perm[j]);
  }
  const auto n_relocated = static_cast<std::size_t>(
      std::llround(config.overlap_fraction * static_cast<double>(n_poison)));
  PoisonMask mask(n, false);
  out.relocated.assign(n, false);
  for (std::size_t i = 0; i < n_poison; ++i) {
    mask[perm[i]] = true;
    if (i < n_relocated) out.relocated[perm[i]] = true;
  }

  const double class_offset = config.class_separation * config.cluster_std;
  const double poison_offset = config.cluster_separation * config.cluster_std;
  auto centroid = [&](std::size_t c, std::size_t j) { return j == c ? class_offset : 0.0; };

  RunExport& run = out.run;
  run.dynamics = DynamicsMatrix(n, config.n_epochs);
  run.embeddings = EmbeddingMatrix(n, d);
  run.labels.assign(n, 0);
  std::size_t clean_seen = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = static_cast<std::size_t>(config.target_label);
    if (mask[i]) {
      run.labels[i] = config.target_label;
      const bool inside = out.relocated[i];
      for (std::size_t j = 0; j < d; ++j) {
        double mu = centroid(t, j);
        if (!inside && j == classes) mu += poison_offset;
        run.embeddings(i, j) = static_cast<float>(rng.normal(mu, config.poison_std));
      }
    } else {
      const std::size_t c = clean_seen++ % classes;
      run.labels[i] = static_cast<std::uint32_t>(c);
      for (std::size_t j = 0; j < d; ++j) {
        run.embeddings(i, j) = static_cast<float>(rng.normal(centroid(c, j), config.cluster_std));
      }
    }
    const auto& profile = mask[i] ? config.poison_profile : config.clean_profile;
    for (std::size_t e = 0; e < config.n_epochs; ++e) {
      run.dynamics(i, e) = static_cast<float>(rng.beta(profile[e].a, profile[e].b));
    }
  }

  RunManifest& m = run.manifest;
  m.n_instances = n;
  m.n_epochs = config.n_epochs;
  m.embed_dim = d;
  m.n_classes = classes;
  if (n_poison > 0) m.target_label = config.target_label;
  m.poisoning_rate = config.poisoning_rate;
  run.mask = std::move(mask);
  validate_run_export(run);
  return out;
}

SyntheticRun benign_run(SyntheticConfig config) {
  config.poisoning_rate = 0.0;
  return generate_run(config);
}

}  // namespace seep
