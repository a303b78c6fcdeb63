#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "seep/types.hpp"

namespace seep {

inline constexpr double kGmmVarianceFloor = 1e-6;

struct KdeModel {
  Matrix<double> support;  // m x d
  double bandwidth = 1.0;

  [[nodiscard]] std::size_t dim() const noexcept { return support.cols(); }
};

struct GmmModel {
  std::vector<double> weights;  // sums to 1
  Matrix<double> means;         // components x d
  Matrix<double> variances;     // components x d, diagonal, >= kGmmVarianceFloor
  double log_likelihood = 0.0;  // mean per-point log-likelihood of the final parameters
  std::size_t iterations = 0;   // M steps performed
  std::vector<double> log_likelihood_trace;  // one entry per E step, non-decreasing

  [[nodiscard]] std::size_t n_components() const noexcept { return weights.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return means.cols(); }
};

using DensityModel = std::variant<KdeModel, GmmModel>;

KdeModel kde_fit(const Matrix<double>& points, double bandwidth);
double kde_log_density(const KdeModel& model, std::span<const double> x);

struct GmmOptions {
  std::size_t n_components = 2;
  std::uint64_t rng_seed = 0;
  double tol = 1e-8;
  std::size_t max_iter = 500;
};

/// Diagonal-covariance EM with k-means++ seeding. A component whose responsibility mass
/// vanishes keeps its parameters and gets weight 0.
GmmModel gmm_fit(const Matrix<double>& points, const GmmOptions& options);
double gmm_log_density(const GmmModel& model, std::span<const double> x);

double log_density(const DensityModel& model, std::span<const double> x);
std::size_t density_dim(const DensityModel& model);

/// log of the arithmetic mean of densities over the rows of xs (log-sum-exp accumulation).
double log_mean_density(const DensityModel& model, const Matrix<double>& xs);
/// exp(log_mean_density); may underflow to 0 in high dimensions.
double mean_density(const DensityModel& model, const Matrix<double>& xs);

/// Numerically stable log(sum(exp(v))). Returns -inf for an empty input.
double log_sum_exp(std::span<const double> v);

}  // namespace seep
