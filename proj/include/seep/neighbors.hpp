#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seep/run_export.hpp"
#include "seep/types.hpp"

namespace seep {

struct NeighborQueryResult {
  std::vector<Index> indices;
  std::vector<double> distances;  // l2, ascending
};

/// Exact l2 k-nearest neighbours of `query` among `pool` rows of `points`.
/// Returns min(k, |pool|) results; equal distances go to the lower instance index.
NeighborQueryResult knn(std::span<const float> query, const EmbeddingMatrix& points,
                        std::span<const Index> pool, std::size_t k);

/// Union of knn over each query row, deduplicated and sorted. Identical to a sequential
/// loop of knn regardless of `threads` (0 means default_thread_count()).
IndexSet knn_batch(const EmbeddingMatrix& queries, const EmbeddingMatrix& points,
                   std::span<const Index> pool, std::size_t k, std::size_t threads = 0);

/// Same, with the queries given as rows of `points`.
IndexSet knn_batch(const EmbeddingMatrix& points, std::span<const Index> query_rows,
                   std::span<const Index> pool, std::size_t k, std::size_t threads = 0);

}  // namespace seep
