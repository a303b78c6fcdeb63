#include "seep/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

#include "seep/neighbors.hpp"
#include "seep/pca.hpp"

namespace seep {

DensitySpace DensitySpace::parse(const std::string& text) {
  if (text == "raw") return {Kind::raw, 0};
  if (text.rfind("pca:", 0) == 0) {
    const std::string digits = text.substr(4);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit) &&
        digits.size() < 10) {
      const auto dim = std::stoul(digits);
      if (dim >= 1) return {Kind::pca, dim};
    }
  }
  throw ValidationError("density space must be 'raw' or 'pca:D' with D >= 1, got '" + text + "'");
}

std::string DensitySpace::str() const {
  return kind == Kind::raw ? "raw" : "pca:" + std::to_string(dim);
}

void PropagationConfig::validate() const {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be a positive number");
  if (!(seed_fraction > 0.0 && seed_fraction <= 1.0)) {
    throw ValidationError("seed fraction must be in (0, 1]");
  }
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ValidationError("bandwidth must be a positive number");
  }
  if (gmm_components < 1) throw ValidationError("gmm components must be >= 1");
  if (density_space.kind == DensitySpace::Kind::pca && density_space.dim < 1) {
    throw ValidationError("pca density space needs dim >= 1");
  }
  if (max_iterations && *max_iterations < 1) throw ValidationError("max iterations must be >= 1");
}

Matrix<double> density_coordinates(const EmbeddingMatrix& embeddings, const DensitySpace& space) {
  Matrix<double> x = to_double(embeddings);
  if (space.kind == DensitySpace::Kind::raw) return x;
  if (x.rows() < 2) return x;  // nothing to fit a projection on
  const std::size_t r = std::min({space.dim, x.cols(), x.rows()});
  return pca_project(pca_fit(x, r), x);
}

DensityModel fit_density(const Matrix<double>& points, const PropagationConfig& config) {
  if (config.density == DensityKind::kde) return kde_fit(points, config.bandwidth);
  GmmOptions opts;
  opts.n_components = config.gmm_components;
  opts.rng_seed = config.gmm_seed;
  return gmm_fit(points, opts);
}

namespace {

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void score_against_mask(IterationRecord& rec, const IndexSet& flagged, const PoisonMask& mask) {
  std::size_t hit = 0;
  for (Index i : flagged) hit += mask[i] ? 1 : 0;
  std::size_t total = 0;
  for (bool b : mask) total += b ? 1 : 0;
  rec.precision = flagged.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(flagged.size());
  if (total > 0) rec.recall = static_cast<double>(hit) / static_cast<double>(total);
}

// Internal consistency of a finished result; a violation is a bug, not bad input.
void check_invariants(const DetectionResult& r, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (Index i : r.seeds) seen[i] = 1;
  IndexSet rebuilt = r.seeds;
  for (const auto& it : r.iterations) {
    for (Index i : it.frontier) {
      if (seen[i]) throw std::logic_error("propagation visited an instance twice");
      seen[i] = 1;
    }
    if (it.accepted) rebuilt = set_union(rebuilt, it.frontier);
  }
  if (rebuilt != r.flagged) throw std::logic_error("flagged set disagrees with iteration trace");
}

}  // namespace

DetectionResult seep_detect(const EmbeddingMatrix& embeddings, const Matrix<double>& coords,
                            const IndexSet& seeds_in, const PropagationConfig& config,
                            const PoisonMask* mask) {
  config.validate();
  const std::size_t n = embeddings.rows();
  if (seeds_in.empty()) throw ValidationError("seep_detect: empty seed set");
  if (coords.rows() != n) {
    throw ValidationError("seep_detect: density coordinates have " + std::to_string(coords.rows()) +
                          " rows for " + std::to_string(n) + " instances");
  }
  if (mask && mask->size() != n) throw ValidationError("seep_detect: mask length mismatch");
  IndexSet seeds = seeds_in;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  if (seeds.back() >= n) {
    throw ValidationError("seep_detect: seed index " + std::to_string(seeds.back()) +
                          " out of range for " + std::to_string(n) + " instances");
  }

  const bool log_space = config.density_space.kind == DensitySpace::Kind::raw;
  const double log_tau = std::log(config.tau);
  auto passes = [&](double log_p) {
    return log_space ? log_p >= log_tau : std::exp(log_p) >= config.tau;
  };

  DetectionResult result;
  result.seeds = seeds;
  std::vector<char> remaining(n, 1);
  for (Index s : seeds) remaining[s] = 0;
  IndexSet flagged = seeds;

  DensityModel g = fit_density(select_rows(coords, seeds), config);
  result.seed_log_p_mu = log_mean_density(g, select_rows(coords, seeds));

  const std::size_t cap = config.max_iterations.value_or(n);
  if (!passes(result.seed_log_p_mu)) {
    result.terminated_by = Termination::threshold;
  } else {
    result.terminated_by = Termination::max_iterations;
    IndexSet pool;
    for (std::size_t iter = 1; iter <= cap; ++iter) {
      pool.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (remaining[i]) pool.push_back(static_cast<Index>(i));
      if (pool.empty()) {
        result.terminated_by = Termination::empty_frontier;
        break;
      }
      IterationRecord rec;
      rec.iteration = iter;
      rec.frontier = knn_batch(embeddings, flagged, pool, config.k, config.threads);
      for (Index i : rec.frontier) remaining[i] = 0;
      rec.log_p_mu = log_mean_density(g, select_rows(coords, rec.frontier));
      rec.p_mu = std::exp(rec.log_p_mu);
      rec.accepted = passes(rec.log_p_mu);
      const IndexSet grown = set_union(flagged, rec.frontier);
      if (mask) score_against_mask(rec, grown, *mask);
      result.iterations.push_back(std::move(rec));
      if (!result.iterations.back().accepted) {
        result.terminated_by = Termination::threshold;
        break;
      }
      flagged = grown;
      if (config.refit_density) g = fit_density(select_rows(coords, flagged), config);
    }
    if (result.terminated_by == Termination::max_iterations &&
        std::none_of(remaining.begin(), remaining.end(), [](char c) { return c != 0; })) {
      // Cap reached exactly as D' ran out; the natural reason wins.
      result.terminated_by = Termination::empty_frontier;
    }
  }
  result.flagged = std::move(flagged);
  check_invariants(result, n);
  return result;
}

DetectionResult seep_detect(const EmbeddingMatrix& embeddings, const IndexSet& seeds,
                            const PropagationConfig& config, const PoisonMask* mask) {
  config.validate();
  return seep_detect(embeddings, density_coordinates(embeddings, config.density_space), seeds,
                     config, mask);
}

PipelineResult run_pipeline(const RunExport& run, const PropagationConfig& config) {
  config.validate();
  PipelineResult out;
  out.scores = score_dynamics(run.dynamics, config.scorer);
  out.seeds = select_seeds(out.scores, config.seed_fraction);
  out.detection = seep_detect(run.embeddings, out.seeds.indices, config,
                              run.mask ? &*run.mask : nullptr);
  return out;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::threshold: return "threshold";
    case Termination::empty_frontier: return "empty_frontier";
    case Termination::max_iterations: return "max_iterations";
  }
  return "unknown";
}

const char* to_string(DensityKind k) { return k == DensityKind::kde ? "kde" : "gmm"; }

}  // namespace seep
