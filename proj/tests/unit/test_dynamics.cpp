#include "doctest.h"

#include <cmath>

#include "seep/dynamics.hpp"
#include "seep/rng.hpp"

using namespace seep;

namespace {

DynamicsMatrix rows(std::size_t e, std::vector<float> v) {
  const std::size_t n = v.size() / e;
  return {n, e, std::move(v)};
}

}  // namespace

TEST_CASE("inv_confidence examples") {
  CHECK(inv_confidence(rows(3, {0.5f, 0.5f, 0.5f})).scores[0] == doctest::Approx(2.0));
  // float32 storage of 0.9/0.99/0.999 shifts the value slightly from 370.
  const double expected = (1.0 / (1.0 - double(0.9f)) + 1.0 / (1.0 - double(0.99f)) +
                           1.0 / (1.0 - double(0.999f))) / 3.0;
  const auto s = inv_confidence(rows(3, {0.9f, 0.99f, 0.999f})).scores[0];
  CHECK(s == doctest::Approx(expected).epsilon(1e-12));
  CHECK(s == doctest::Approx(370.0).epsilon(1e-4));
  CHECK(inv_confidence(rows(1, {1.0f})).scores[0] == 1.0e12);
}

TEST_CASE("mean_confidence examples") {
  CHECK(mean_confidence(rows(3, {0.5f, 0.5f, 0.5f})).scores[0] == doctest::Approx(0.5));
  CHECK(mean_confidence(rows(3, {0.9f, 0.99f, 0.999f})).scores[0] ==
        doctest::Approx(0.963).epsilon(1e-7));
  CHECK(mean_confidence(rows(2, {0.0f, 1.0f})).scores[0] == 0.5);
}

TEST_CASE("score ranges") {
  Rng rng(3);
  DynamicsMatrix d(300, 4);
  for (auto& v : d.values()) v = static_cast<float>(rng.uniform());
  d(0, 0) = 1.0f;
  d(1, 2) = 0.0f;
  for (double s : inv_confidence(d).scores) CHECK(s >= 1.0);
  for (double s : mean_confidence(d).scores) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("inv_confidence is monotone in every entry") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    DynamicsMatrix d(1, 3);
    for (auto& v : d.values()) v = static_cast<float>(rng.uniform());
    const double before = inv_confidence(d).scores[0];
    const auto e = rng.below(3);
    d(0, e) = std::min(1.0f, d(0, e) + static_cast<float>(rng.uniform() * 0.5));
    CHECK(inv_confidence(d).scores[0] >= before);
  }
}

TEST_CASE("both scorers match a naive recomputation") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(200), e = 1 + rng.below(5);
    DynamicsMatrix d(n, e);
    for (auto& v : d.values()) v = static_cast<float>(rng.uniform());
    const auto inv = inv_confidence(d), mean = mean_confidence(d);
    for (std::size_t i = 0; i < n; ++i) {
      double a = 0, b = 0;
      for (std::size_t j = 0; j < e; ++j) {
        const double p = std::min(double(d(i, j)), 1.0 - kInvConfidenceEps);
        a += 1.0 / (1.0 - p);
        b += d(i, j);
      }
      CHECK(std::abs(inv.scores[i] - a / e) <= 1e-12 * (a / e));
      CHECK(std::abs(mean.scores[i] - b / e) <= 1e-12 * std::max(b / e, 1e-300));
    }
  }
}

TEST_CASE("confidence_std is the population deviation") {
  const auto sd = confidence_std(rows(2, {0.0f, 1.0f, 0.5f, 0.5f}));
  CHECK(sd[0] == doctest::Approx(0.5));
  CHECK(sd[1] == 0.0);
}

TEST_CASE("seed selection") {
  ScoreVector s{{370, 2, 2, 1.5}, ScorerKind::inv_confidence};
  CHECK(select_seeds(s, 0.25).indices == IndexSet{0});

  ScoreVector flat{{1, 1, 1, 1}, ScorerKind::inv_confidence};
  CHECK(select_seeds(flat, 0.5).indices == IndexSet{0, 1});

  ScoreVector big{std::vector<double>(1000, 1.0), ScorerKind::inv_confidence};
  CHECK(select_seeds(big, 0.01).indices.size() == 10);
  CHECK(select_seeds(big, 0.0001).indices.size() == 1);
  CHECK(select_seeds(big, 1.0).indices.size() == 1000);

  CHECK_THROWS_AS(select_seeds(ScoreVector{}, 0.5), ValidationError);
  CHECK_THROWS_AS(select_seeds(s, 0.0), ValidationError);
  CHECK_THROWS_AS(select_seeds(s, 1.5), ValidationError);
}

TEST_CASE("seed_count rounds up but not on floating noise") {
  CHECK(seed_count(0.07, 100) == 7);
  CHECK(seed_count(0.011, 1000) == 11);
  CHECK(seed_count(0.0101, 1000) == 11);
  CHECK(seed_count(0.3, 10) == 3);
  CHECK(seed_count(0.25, 5) == 2);
}

TEST_CASE("selected seeds are exactly the top by score") {
  Rng rng(23);
  std::vector<double> v(500);
  for (auto& x : v) x = std::floor(rng.uniform() * 20);  // plenty of ties
  const auto seeds = select_seeds(ScoreVector{v, ScorerKind::mean_confidence}, 0.1).indices;
  REQUIRE(seeds.size() == 50);
  std::vector<char> in(v.size(), 0);
  for (auto i : seeds) in[i] = 1;
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (!in[a]) continue;
    for (std::size_t b = 0; b < v.size(); ++b) {
      if (in[b]) continue;
      CHECK((v[a] > v[b] || (v[a] == v[b] && a < b)));
    }
  }
  CHECK(select_seeds(ScoreVector{v, ScorerKind::mean_confidence}, 0.1).indices == seeds);
}

TEST_CASE("dynamics-only filter") {
  ScoreVector s{{5, 4, 3, 2}, ScorerKind::inv_confidence};
  CHECK(dynamics_only_filter(s, 2) == IndexSet{0, 1});
  CHECK(dynamics_only_filter(s, 0).empty());
  CHECK(dynamics_only_filter(s, 4).size() == 4);
  CHECK_THROWS_AS(dynamics_only_filter(s, 5), ValidationError);
}
