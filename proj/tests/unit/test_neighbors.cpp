#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seep/neighbors.hpp"
#include "seep/rng.hpp"

using namespace seep;

namespace {

IndexSet all(std::size_t n) {
  IndexSet v(n);
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

EmbeddingMatrix random_points(Rng& rng, std::size_t n, std::size_t d) {
  EmbeddingMatrix m(n, d);
  for (auto& v : m.values()) v = static_cast<float>(rng.normal());
  return m;
}

// Quadratic oracle: full sort of (distance^2, index) over the pool.
std::vector<std::pair<double, Index>> oracle(std::span<const float> q, const EmbeddingMatrix& pts,
                                             const IndexSet& pool, std::size_t k) {
  std::vector<std::pair<double, Index>> all_d;
  for (Index i : pool) {
    double s = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double t = double(q[j]) - double(pts(i, j));
      s += t * t;
    }
    all_d.emplace_back(s, i);
  }
  std::sort(all_d.begin(), all_d.end());
  all_d.resize(std::min(k, all_d.size()));
  return all_d;
}

}  // namespace

TEST_CASE("1-D example") {
  const EmbeddingMatrix pts(4, 1, {0.0f, 1.0f, 2.0f, 10.0f});
  const float q[] = {0.4f};
  const auto r = knn(q, pts, all(4), 2);
  CHECK(r.indices == std::vector<Index>{0, 1});
  CHECK(r.distances[0] == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(r.distances[1] == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("query on a pool point, and k larger than the pool") {
  const EmbeddingMatrix pts(3, 2, {0, 0, 1, 1, 2, 2});
  const float q[] = {1.0f, 1.0f};
  const auto r = knn(q, pts, all(3), 1);
  CHECK(r.indices == std::vector<Index>{1});
  CHECK(r.distances[0] == 0.0);
  CHECK(knn(q, pts, all(3), 5).indices.size() == 3);
}

TEST_CASE("distance ties go to the lower index") {
  const EmbeddingMatrix pts(4, 1, {-1.0f, 1.0f, -1.0f, 1.0f});
  const float q[] = {0.0f};
  CHECK(knn(q, pts, all(4), 3).indices == std::vector<Index>{0, 1, 2});
}

TEST_CASE("results come only from the pool") {
  const EmbeddingMatrix pts(4, 1, {0.0f, 0.1f, 5.0f, 6.0f});
  const float q[] = {0.0f};
  const IndexSet pool{2, 3};
  CHECK(knn(q, pts, pool, 1).indices == std::vector<Index>{2});
}

TEST_CASE("reported distances are l2, not squared") {
  const EmbeddingMatrix pts(1, 2, {3.0f, 4.0f});
  const float q[] = {0.0f, 0.0f};
  CHECK(knn(q, pts, all(1), 1).distances[0] == 5.0);
}

TEST_CASE("argument errors") {
  const EmbeddingMatrix pts(2, 1, {0.0f, 1.0f});
  const float q1[] = {0.0f};
  const float q2[] = {0.0f, 0.0f};
  CHECK_THROWS_AS(knn(q1, pts, IndexSet{}, 1), ValidationError);
  CHECK_THROWS_AS(knn(q1, pts, all(2), 0), ValidationError);
  CHECK_THROWS_AS(knn(q2, pts, all(2), 1), ValidationError);
}

TEST_CASE("batch union semantics") {
  const EmbeddingMatrix pts(4, 1, {0.0f, 0.1f, 10.0f, 10.1f});
  const EmbeddingMatrix shared(2, 1, {0.01f, 0.02f});
  CHECK(knn_batch(shared, pts, IndexSet{0, 2}, 1).size() == 1);
  const EmbeddingMatrix apart(2, 1, {0.0f, 10.0f});
  CHECK(knn_batch(apart, pts, IndexSet{1, 3}, 1) == IndexSet{1, 3});
  CHECK(knn_batch(pts, IndexSet{}, all(4), 1).empty());
}

TEST_CASE("random 50x8 pool, 5 queries, k=3 matches the oracle union") {
  Rng rng(8);
  const auto pts = random_points(rng, 50, 8);
  const IndexSet queries{3, 11, 20, 31, 44};
  IndexSet pool;
  for (Index i = 0; i < 50; ++i)
    if (!std::binary_search(queries.begin(), queries.end(), i)) pool.push_back(i);
  IndexSet expect;
  for (Index q : queries)
    for (const auto& [d, i] : oracle(pts.row(q), pts, pool, 3)) expect.push_back(i);
  std::sort(expect.begin(), expect.end());
  expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
  CHECK(knn_batch(pts, queries, pool, 3) == expect);
}

TEST_CASE("exactness against brute force on random instances") {
  Rng rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(300), d = 1 + rng.below(64), k = 1 + rng.below(12);
    const auto pts = random_points(rng, n, d);
    const auto q = random_points(rng, 1, d);
    IndexSet pool;
    for (Index i = 0; i < n; ++i)
      if (rng.uniform() < 0.7) pool.push_back(i);
    if (pool.empty()) pool.push_back(0);
    const auto got = knn(q.row(0), pts, pool, k);
    const auto want = oracle(q.row(0), pts, pool, k);
    REQUIRE(got.indices.size() == want.size());
    for (std::size_t j = 0; j < want.size(); ++j) {
      CHECK(got.indices[j] == want[j].second);
      CHECK(std::abs(got.distances[j] - std::sqrt(want[j].first)) <=
            1e-6 * std::max(1.0, std::sqrt(want[j].first)));
      if (j > 0) CHECK(got.distances[j] >= got.distances[j - 1]);
    }
  }
}

TEST_CASE("thread count never changes the batch result") {
  Rng rng(2);
  const auto pts = random_points(rng, 400, 6);
  IndexSet queries, pool;
  for (Index i = 0; i < 400; ++i) (i % 4 == 0 ? queries : pool).push_back(i);
  const auto one = knn_batch(pts, queries, pool, 5, 1);
  CHECK(knn_batch(pts, queries, pool, 5, 3) == one);
  CHECK(knn_batch(pts, queries, pool, 5, 8) == one);
  const auto qm = select_rows(pts, queries);
  CHECK(knn_batch(qm, pts, pool, 5, 4) == one);
}
