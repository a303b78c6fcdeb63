#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seep/density.hpp"
#include "seep/dynamics.hpp"
#include "seep/run_export.hpp"
#include "seep/types.hpp"

namespace seep {

enum class DensityKind { kde, gmm };
enum class Termination { threshold, empty_frontier, max_iterations };

/// Where g is fitted and evaluated. KNN always runs on the full embeddings.
struct DensitySpace {
  enum class Kind { pca, raw } kind = Kind::pca;
  std::size_t dim = 8;  // pca only; clamped to min(n, embed_dim)

  static DensitySpace parse(const std::string& text);  // "pca:D" or "raw"
  [[nodiscard]] std::string str() const;
};

struct PropagationConfig {
  std::size_t k = 5;
  double tau = 1e-8;
  double seed_fraction = 0.01;
  ScorerKind scorer = ScorerKind::inv_confidence;
  DensityKind density = DensityKind::kde;
  double bandwidth = 1.0;
  std::size_t gmm_components = 2;
  std::uint64_t gmm_seed = 0;
  DensitySpace density_space;
  std::optional<std::size_t> max_iterations;  // default n_instances
  bool refit_density = false;
  std::size_t threads = 0;  // 0: default_thread_count()

  /// Throws ValidationError on any out-of-range field.
  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  IndexSet frontier;          // C' for this step
  double log_p_mu = 0.0;
  double p_mu = 0.0;
  bool accepted = false;
  // Of the flagged set as it would stand with this frontier added; only with a mask.
  std::optional<double> precision;
  std::optional<double> recall;
};

struct DetectionResult {
  IndexSet seeds;
  IndexSet flagged;
  double seed_log_p_mu = 0.0;  // g evaluated on the seeds themselves
  std::vector<IterationRecord> iterations;
  Termination terminated_by = Termination::threshold;
};

/// Coordinates the density model sees for each instance.
Matrix<double> density_coordinates(const EmbeddingMatrix& embeddings, const DensitySpace& space);

DensityModel fit_density(const Matrix<double>& points, const PropagationConfig& config);

/// Seed-and-propagate over `embeddings`. `coords` are the density-space coordinates
/// (one row per instance). The first frontier whose mean density falls below tau is
/// recorded but not flagged.
DetectionResult seep_detect(const EmbeddingMatrix& embeddings, const Matrix<double>& coords,
                            const IndexSet& seeds, const PropagationConfig& config,
                            const PoisonMask* mask = nullptr);

/// Convenience overload computing the density coordinates from config.density_space.
DetectionResult seep_detect(const EmbeddingMatrix& embeddings, const IndexSet& seeds,
                            const PropagationConfig& config, const PoisonMask* mask = nullptr);

/// Full pipeline on a run export: score, select seeds, propagate.
struct PipelineResult {
  ScoreVector scores;
  SeedSet seeds;
  DetectionResult detection;
};
PipelineResult run_pipeline(const RunExport& run, const PropagationConfig& config);

const char* to_string(Termination t);
const char* to_string(DensityKind k);

}  // namespace seep
