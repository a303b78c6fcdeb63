#pragma once

#include <cstddef>
#include <vector>

#include "seep/types.hpp"

namespace seep {

struct PcaModel {
  std::vector<double> mean;
  Matrix<double> components;  // r x d, orthonormal rows
  std::vector<double> explained_variance;  // descending, 1/(n-1) normalisation

  [[nodiscard]] std::size_t rank() const noexcept { return components.rows(); }
  [[nodiscard]] std::size_t dim() const noexcept { return components.cols(); }
};

/// SVD of the centred data. Each component's largest-magnitude entry is made positive
/// (first such entry on exact ties).
PcaModel pca_fit(const Matrix<double>& x, std::size_t r);

Matrix<double> pca_project(const PcaModel& model, const Matrix<double>& x);

/// Inverse map from component coordinates back to the original space.
Matrix<double> pca_reconstruct(const PcaModel& model, const Matrix<double>& z);

}  // namespace seep
