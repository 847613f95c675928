#include "tbnn/kernels.hpp"

#include "tbnn/errors.hpp"

namespace tbnn {

void dense_apply(const RowMat& a, const Eigen::MatrixXd& x, Eigen::MatrixXd& y,
                 Exec exec) {
  if (a.cols() != x.rows()) throw DimensionError("dense_apply: shape mismatch");
  const Eigen::Index n = a.rows();
  y.resize(n, x.cols());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) y.row(i) = a.row(i) * x;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) y.row(i) = a.row(i) * x;
  }
}

Eigen::MatrixXd dense_apply(const RowMat& a, const Eigen::MatrixXd& x,
                            Exec exec) {
  Eigen::MatrixXd y;
  dense_apply(a, x, y, exec);
  return y;
}

Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& points, Exec exec) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d2(n, n);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        d2(i, j) = (points.row(i) - points.row(j)).squaredNorm();
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        d2(i, j) = (points.row(i) - points.row(j)).squaredNorm();
  }
  return d2;
}

}  // namespace tbnn
