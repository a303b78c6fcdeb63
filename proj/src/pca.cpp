#include "seep/pca.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace seep {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> view(const Matrix<double>& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

PcaModel pca_fit(const Matrix<double>& x, std::size_t r) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw ValidationError("pca: need at least 2 points");
  if (r < 1 || r > std::min(n, d)) {
    throw ValidationError("pca: rank " + std::to_string(r) + " must be in [1, min(n, d) = " +
                          std::to_string(std::min(n, d)) + "]");
  }

  const auto data = view(x);
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centred = data.rowwise() - mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();

  PcaModel model;
  model.mean.assign(mean.data(), mean.data() + d);
  model.components = Matrix<double>(r, d);
  model.explained_variance.resize(r);
  for (std::size_t c = 0; c < r; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::abs(v(static_cast<Eigen::Index>(j), col)) >
          std::abs(v(static_cast<Eigen::Index>(arg), col))) {
        arg = j;
      }
    }
    const double sign = v(static_cast<Eigen::Index>(arg), col) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      model.components(c, j) = sign * v(static_cast<Eigen::Index>(j), col);
    }
    const double sv = c < static_cast<std::size_t>(s.size()) ? s(col) : 0.0;
    model.explained_variance[c] = sv * sv / static_cast<double>(n - 1);
  }
  return model;
}

Matrix<double> pca_project(const PcaModel& model, const Matrix<double>& x) {
  if (x.cols() != model.dim()) {
    throw ValidationError("pca_project: input dimension " + std::to_string(x.cols()) +
                          " does not match model dimension " + std::to_string(model.dim()));
  }
  const Eigen::Map<const Eigen::RowVectorXd> mean(model.mean.data(),
                                                  static_cast<Eigen::Index>(model.mean.size()));
  Matrix<double> out(x.rows(), model.rank());
  Eigen::Map<RowMatrix> dst(out.values().data(), static_cast<Eigen::Index>(out.rows()),
                            static_cast<Eigen::Index>(out.cols()));
  dst.noalias() = (view(x).rowwise() - mean) * view(model.components).transpose();
  return out;
}

Matrix<double> pca_reconstruct(const PcaModel& model, const Matrix<double>& z) {
  if (z.cols() != model.rank()) {
    throw ValidationError("pca_reconstruct: input has " + std::to_string(z.cols()) +
                          " coordinates, model rank is " + std::to_string(model.rank()));
  }
  const Eigen::Map<const Eigen::RowVectorXd> mean(model.mean.data(),
                                                  static_cast<Eigen::Index>(model.mean.size()));
  Matrix<double> out(z.rows(), model.dim());
  Eigen::Map<RowMatrix> dst(out.values().data(), static_cast<Eigen::Index>(out.rows()),
                            static_cast<Eigen::Index>(out.cols()));
  dst.noalias() = view(z) * view(model.components);
  dst.rowwise() += mean;
  return out;
}

}  // namespace seep
