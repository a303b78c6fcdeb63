#pragma once

#include <cstddef>
#include <vector>

#include "seep/run_export.hpp"
#include "seep/types.hpp"

namespace seep {

enum class ScorerKind { inv_confidence, mean_confidence };

inline constexpr double kInvConfidenceEps = 1e-12;

struct ScoreVector {
  std::vector<double> scores;
  ScorerKind kind = ScorerKind::inv_confidence;
};

struct SeedSet {
  IndexSet indices;  // sorted ascending
  double fraction = 0.0;
};

/// mean_e 1 / (1 - p), with 1 - p floored at kInvConfidenceEps.
ScoreVector inv_confidence(const DynamicsMatrix& dynamics);
/// mean_e p.
ScoreVector mean_confidence(const DynamicsMatrix& dynamics);
ScoreVector score_dynamics(const DynamicsMatrix& dynamics, ScorerKind kind);

/// Per-row population standard deviation of p. Diagnostics only.
std::vector<double> confidence_std(const DynamicsMatrix& dynamics);

/// ceil(fraction * n), guarded against floating overshoot such as 0.07 * 100.
std::size_t seed_count(double fraction, std::size_t n);

/// Indices of the `count` highest scores. Ties go to the lower index.
/// Returned sorted ascending by index.
IndexSet top_k_by_score(const std::vector<double>& scores, std::size_t count);

SeedSet select_seeds(const ScoreVector& scores, double fraction);

/// Dynamics-only ablation: discards the top `discard_count` instances by score.
IndexSet dynamics_only_filter(const ScoreVector& scores, std::size_t discard_count);

const char* to_string(ScorerKind kind);

}  // namespace seep
