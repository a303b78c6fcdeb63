#include "seep/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "seep/pca.hpp"
#include "seep/rng.hpp"

namespace seep {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
  return acc;
}

KMeansResult lloyd(const Matrix<double>& points, std::size_t k, Rng& rng, std::size_t max_iter) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  KMeansResult r;
  r.centroids = Matrix<double>(k, d);

  // k-means++
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(points.row(pick).begin(), d, r.centroids.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), r.centroids.row(c)));
      total += d2[i];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      pick = rng.below(n);
      continue;
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc > target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }

  r.assignment.assign(n, 0);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dist = squared_distance(points.row(i), r.centroids.row(c));
        if (dist < best_d) {
          best_d = dist;
          best = static_cast<std::uint32_t>(c);
        }
      }
      if (iter == 0 || best != r.assignment[i]) changed = true;
      r.assignment[i] = best;
      inertia += best_d;
    }
    r.inertia_trace.push_back(inertia);
    r.inertia = inertia;
    if (!changed) break;

    Matrix<double> sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = r.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums(c, j) += points(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) r.centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
  }
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix<double>& points, std::size_t k, std::uint64_t rng_seed,
                    std::size_t n_restarts, std::size_t max_iter) {
  if (k < 1 || points.rows() < k) throw ValidationError("kmeans: need at least k points");
  Rng rng(rng_seed);
  KMeansResult best;
  for (std::size_t r = 0; r < std::max<std::size_t>(n_restarts, 1); ++r) {
    KMeansResult cur = lloyd(points, k, rng, std::max<std::size_t>(max_iter, 1));
    if (r == 0 || cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

IndexSet activation_clustering(const EmbeddingMatrix& embeddings, const LabelVector& labels,
                               const ClusteringBaselineConfig& config) {
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) throw ValidationError("activation_clustering: labels length mismatch");
  if (config.discard_count > n) {
    throw ValidationError("discard count " + std::to_string(config.discard_count) +
                          " exceeds n_instances " + std::to_string(n));
  }
  if (config.pca_dim < 1) throw ValidationError("activation_clustering: pca_dim must be >= 1");

  std::map<std::uint32_t, IndexSet> classes;
  for (std::size_t i = 0; i < n; ++i) classes[labels[i]].push_back(static_cast<Index>(i));

  // (not suspicious, ratio, index): suspicious members first, closest to the suspicious centroid first.
  std::vector<std::tuple<int, double, Index>> ranked;
  ranked.reserve(n);
  const Matrix<double> all = to_double(embeddings);
  for (const auto& [label, members] : classes) {
    if (members.size() < 2) {
      throw ValidationError("activation_clustering: class " + std::to_string(label) +
                            " has fewer than 2 instances");
    }
    const Matrix<double> x = select_rows(all, members);
    const std::size_t r = std::min({config.pca_dim, x.cols(), x.rows()});
    const Matrix<double> z = pca_project(pca_fit(x, r), x);
    const KMeansResult km = kmeans(z, 2, config.rng_seed + label, config.n_restarts, config.max_iter);

    const auto in_one = static_cast<std::size_t>(
        std::count(km.assignment.begin(), km.assignment.end(), 1u));
    const std::uint32_t suspicious = in_one <= members.size() - in_one ? 1u : 0u;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const double ds = std::sqrt(squared_distance(z.row(i), km.centroids.row(suspicious)));
      const double dother = std::sqrt(squared_distance(z.row(i), km.centroids.row(1 - suspicious)));
      const double ratio = dother > 0.0 ? ds / dother : std::numeric_limits<double>::infinity();
      ranked.emplace_back(km.assignment[i] == suspicious ? 0 : 1, ratio, members[i]);
    }
  }
  std::sort(ranked.begin(), ranked.end());
  IndexSet out;
  out.reserve(config.discard_count);
  for (std::size_t i = 0; i < config.discard_count; ++i) out.push_back(std::get<2>(ranked[i]));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace seep
