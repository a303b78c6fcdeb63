#include "seep/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "seep/parallel.hpp"

namespace seep {

namespace {

using Candidate = std::pair<double, Index>;  // (squared distance, index); pair order is the tie-break

void check_args(std::size_t query_dim, const EmbeddingMatrix& points, std::span<const Index> pool,
                std::size_t k) {
  if (pool.empty()) throw ValidationError("knn: candidate pool is empty");
  if (k < 1) throw ValidationError("knn: k must be >= 1");
  if (query_dim != points.cols()) {
    throw ValidationError("knn: query dimension " + std::to_string(query_dim) +
                          " does not match embedding dimension " + std::to_string(points.cols()));
  }
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
    acc += diff * diff;
  }
  return acc;
}

// Keeps scratch allocation out of the per-query path.
void nearest(std::span<const float> query, const EmbeddingMatrix& points,
             std::span<const Index> pool, std::size_t k, std::vector<Candidate>& scratch) {
  scratch.resize(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    scratch[i] = {squared_distance(query, points.row(pool[i])), pool[i]};
  }
  const std::size_t take = std::min(k, pool.size());
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take),
                    scratch.end());
  scratch.resize(take);
}

template <typename QueryAt>
IndexSet batch(std::size_t n_queries, QueryAt query_at, const EmbeddingMatrix& points,
               std::span<const Index> pool, std::size_t k, std::size_t threads) {
  if (threads == 0) threads = default_thread_count();
  const std::size_t take = std::min(k, pool.size());
  std::vector<Index> hits(n_queries * take);
  parallel_chunks(n_queries, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Candidate> scratch;
    for (std::size_t q = begin; q < end; ++q) {
      nearest(query_at(q), points, pool, k, scratch);
      for (std::size_t j = 0; j < take; ++j) hits[q * take + j] = scratch[j].second;
    }
  });
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

}  // namespace

NeighborQueryResult knn(std::span<const float> query, const EmbeddingMatrix& points,
                        std::span<const Index> pool, std::size_t k) {
  check_args(query.size(), points, pool, k);
  std::vector<Candidate> scratch;
  nearest(query, points, pool, k, scratch);
  NeighborQueryResult out;
  out.indices.reserve(scratch.size());
  out.distances.reserve(scratch.size());
  for (const auto& [d2, idx] : scratch) {
    out.indices.push_back(idx);
    out.distances.push_back(std::sqrt(d2));
  }
  return out;
}

IndexSet knn_batch(const EmbeddingMatrix& queries, const EmbeddingMatrix& points,
                   std::span<const Index> pool, std::size_t k, std::size_t threads) {
  if (queries.rows() == 0) return {};
  check_args(queries.cols(), points, pool, k);
  return batch(
      queries.rows(), [&](std::size_t q) { return queries.row(q); }, points, pool, k, threads);
}

IndexSet knn_batch(const EmbeddingMatrix& points, std::span<const Index> query_rows,
                   std::span<const Index> pool, std::size_t k, std::size_t threads) {
  if (query_rows.empty()) return {};
  check_args(points.cols(), points, pool, k);
  return batch(
      query_rows.size(), [&](std::size_t q) { return points.row(query_rows[q]); }, points, pool, k,
      threads);
}

}  // namespace seep
