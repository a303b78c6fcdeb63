#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "seep/run_export.hpp"
#include "seep/types.hpp"

namespace seep {

struct ClusteringBaselineConfig {
  std::size_t discard_count = 0;
  std::size_t pca_dim = 10;  // clamped per class to min(class size, embed_dim)
  std::uint64_t rng_seed = 0;
  std::size_t n_restarts = 5;
  std::size_t max_iter = 300;
};

struct KMeansResult {
  Matrix<double> centroids;
  std::vector<std::uint32_t> assignment;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // after each assignment step, non-increasing
};

/// Lloyd's algorithm with k-means++ seeding, best of n_restarts by inertia.
/// An emptied cluster keeps its previous centroid.
KMeansResult kmeans(const Matrix<double>& points, std::size_t k, std::uint64_t rng_seed,
                    std::size_t n_restarts, std::size_t max_iter = 300);

/// Per-class 2-means on PCA-reduced embeddings; members of each class's smaller
/// cluster are ranked by d(own centroid) / d(other centroid) and the first
/// discard_count across all classes are returned (sorted by index).
IndexSet activation_clustering(const EmbeddingMatrix& embeddings, const LabelVector& labels,
                               const ClusteringBaselineConfig& config);

}  // namespace seep
