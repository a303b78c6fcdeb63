#include "seep/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace seep {

ScoreVector inv_confidence(const DynamicsMatrix& dynamics) {
  ScoreVector out{std::vector<double>(dynamics.rows(), 0.0), ScorerKind::inv_confidence};
  const double epochs = static_cast<double>(dynamics.cols());
  for (std::size_t i = 0; i < dynamics.rows(); ++i) {
    double acc = 0.0;
    for (float p : dynamics.row(i)) {
      acc += 1.0 / std::max(1.0 - static_cast<double>(p), kInvConfidenceEps);
    }
    out.scores[i] = acc / epochs;
  }
  return out;
}

ScoreVector mean_confidence(const DynamicsMatrix& dynamics) {
  ScoreVector out{std::vector<double>(dynamics.rows(), 0.0), ScorerKind::mean_confidence};
  const double epochs = static_cast<double>(dynamics.cols());
  for (std::size_t i = 0; i < dynamics.rows(); ++i) {
    double acc = 0.0;
    for (float p : dynamics.row(i)) acc += static_cast<double>(p);
    out.scores[i] = acc / epochs;
  }
  return out;
}

ScoreVector score_dynamics(const DynamicsMatrix& dynamics, ScorerKind kind) {
  return kind == ScorerKind::inv_confidence ? inv_confidence(dynamics) : mean_confidence(dynamics);
}

std::vector<double> confidence_std(const DynamicsMatrix& dynamics) {
  std::vector<double> out(dynamics.rows(), 0.0);
  const double epochs = static_cast<double>(dynamics.cols());
  for (std::size_t i = 0; i < dynamics.rows(); ++i) {
    double mean = 0.0;
    for (float p : dynamics.row(i)) mean += p;
    mean /= epochs;
    double ss = 0.0;
    for (float p : dynamics.row(i)) ss += (p - mean) * (p - mean);
    out[i] = std::sqrt(ss / epochs);
  }
  return out;
}

std::size_t seed_count(double fraction, std::size_t n) {
  const double raw = fraction * static_cast<double>(n);
  const double floor_v = std::floor(raw);
  double k = std::ceil(raw);
  if (raw - floor_v <= 1e-9 * std::max(1.0, raw)) k = floor_v;
  return static_cast<std::size_t>(std::max(1.0, k));
}

IndexSet top_k_by_score(const std::vector<double>& scores, std::size_t count) {
  if (count > scores.size()) {
    throw ValidationError("cannot take " + std::to_string(count) + " of " +
                          std::to_string(scores.size()) + " instances");
  }
  IndexSet order(scores.size());
  std::iota(order.begin(), order.end(), Index{0});
  auto by_score = [&](Index a, Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    by_score);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

SeedSet select_seeds(const ScoreVector& scores, double fraction) {
  if (scores.scores.empty()) throw ValidationError("cannot select seeds from an empty score vector");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("seed fraction must be in (0, 1]");
  }
  const std::size_t k = std::min(seed_count(fraction, scores.scores.size()), scores.scores.size());
  return {top_k_by_score(scores.scores, k), fraction};
}

IndexSet dynamics_only_filter(const ScoreVector& scores, std::size_t discard_count) {
  return top_k_by_score(scores.scores, discard_count);
}

const char* to_string(ScorerKind kind) {
  return kind == ScorerKind::inv_confidence ? "inv" : "mean";
}

}  // namespace seep
