#include "seep/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "seep/rng.hpp"

namespace seep {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ValidationError(std::string(what) + ": point dimension " + std::to_string(got) +
                          " does not match model dimension " + std::to_string(want));
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

double diag_log_normal(std::span<const double> x, std::span<const double> mean,
                       std::span<const double> var) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = x[j] - mean[j];
    acc += diff * diff / var[j] + std::log(var[j]);
  }
  return -0.5 * (acc + static_cast<double>(x.size()) * kLog2Pi);
}

double component_log_density(const GmmModel& model, std::size_t c, std::span<const double> x) {
  if (model.weights[c] <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(model.weights[c]) + diag_log_normal(x, model.means.row(c), model.variances.row(c));
}

// k-means++ centres; falls back to a uniform pick when every remaining point coincides
// with a chosen centre.
Matrix<double> kmeans_pp(const Matrix<double>& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix<double> centres(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(points.row(pick).begin(), points.cols(), centres.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centres.row(c)));
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
  return centres;
}

}  // namespace

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

KdeModel kde_fit(const Matrix<double>& points, double bandwidth) {
  if (points.rows() == 0) throw ValidationError("kde_fit: empty point set");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ValidationError("kde_fit: bandwidth must be a positive finite number");
  }
  return {points, bandwidth};
}

double kde_log_density(const KdeModel& model, std::span<const double> x) {
  check_dim(x.size(), model.dim(), "kde_log_density");
  const std::size_t m = model.support.rows();
  const double h = model.bandwidth;
  const double inv_two_h2 = 1.0 / (2.0 * h * h);
  std::vector<double> terms(m);
  for (std::size_t j = 0; j < m; ++j) {
    terms[j] = -squared_distance(x, model.support.row(j)) * inv_two_h2;
  }
  const double d = static_cast<double>(model.dim());
  return log_sum_exp(terms) - std::log(static_cast<double>(m)) - d * std::log(h) - 0.5 * d * kLog2Pi;
}

GmmModel gmm_fit(const Matrix<double>& points, const GmmOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  const std::size_t k = options.n_components;
  if (k < 1) throw ValidationError("gmm_fit: n_components must be >= 1");
  if (n < k) {
    throw ValidationError("gmm_fit: " + std::to_string(n) + " points cannot support " +
                          std::to_string(k) + " components");
  }
  if (d == 0) throw ValidationError("gmm_fit: points have zero dimension");

  Rng rng(options.rng_seed);
  GmmModel model;
  model.means = kmeans_pp(points, k, rng);
  model.weights.assign(k, 1.0 / static_cast<double>(k));

  // Start every component at the pooled per-dimension variance.
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += points(i, j);
  for (double& v : mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) var[j] += (points(i, j) - mean[j]) * (points(i, j) - mean[j]);
  model.variances = Matrix<double>(k, d);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j)
      model.variances(c, j) = std::max(var[j] / static_cast<double>(n), kGmmVarianceFloor);

  Matrix<double> resp(n, k);
  std::vector<double> logs(k);
  for (std::size_t iter = 0;; ++iter) {
    // E step
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) logs[c] = component_log_density(model, c, points.row(i));
      const double lse = log_sum_exp(logs);
      ll += lse;
      for (std::size_t c = 0; c < k; ++c) resp(i, c) = std::exp(logs[c] - lse);
    }
    ll /= static_cast<double>(n);
    model.log_likelihood_trace.push_back(ll);
    model.log_likelihood = ll;

    const std::size_t t = model.log_likelihood_trace.size();
    if (t >= 2 && ll - model.log_likelihood_trace[t - 2] < options.tol) break;
    if (iter >= options.max_iter) break;

    // M step
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp(i, c);
      if (!(nk > 0.0)) {
        model.weights[c] = 0.0;
        continue;
      }
      model.weights[c] = nk / static_cast<double>(n);
      std::vector<double> mu(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mu[j] += resp(i, c) * points(i, j);
      for (double& v : mu) v /= nk;
      std::vector<double> s2(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = points(i, j) - mu[j];
          s2[j] += resp(i, c) * diff * diff;
        }
      for (std::size_t j = 0; j < d; ++j) {
        model.means(c, j) = mu[j];
        model.variances(c, j) = std::max(s2[j] / nk, kGmmVarianceFloor);
      }
    }
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;
    ++model.iterations;
  }
  return model;
}

double gmm_log_density(const GmmModel& model, std::span<const double> x) {
  check_dim(x.size(), model.dim(), "gmm_log_density");
  std::vector<double> logs(model.n_components());
  for (std::size_t c = 0; c < logs.size(); ++c) logs[c] = component_log_density(model, c, x);
  return log_sum_exp(logs);
}

double log_density(const DensityModel& model, std::span<const double> x) {
  return std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KdeModel>) {
          return kde_log_density(m, x);
        } else {
          return gmm_log_density(m, x);
        }
      },
      model);
}

std::size_t density_dim(const DensityModel& model) {
  return std::visit([](const auto& m) { return m.dim(); }, model);
}

double log_mean_density(const DensityModel& model, const Matrix<double>& xs) {
  if (xs.rows() == 0) throw ValidationError("mean_density: empty point set");
  std::vector<double> logs(xs.rows());
  for (std::size_t i = 0; i < xs.rows(); ++i) logs[i] = log_density(model, xs.row(i));
  return log_sum_exp(logs) - std::log(static_cast<double>(xs.rows()));
}

double mean_density(const DensityModel& model, const Matrix<double>& xs) {
  return std::exp(log_mean_density(model, xs));
}

}  // namespace seep
