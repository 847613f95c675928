#pragma once

#include <Eigen/Core>

namespace tbnn {

// Every data-parallel kernel comes in two flavors selected by Exec: a plain
// serial loop and an OpenMP version. Both compute each output element with
// the same per-element code and accumulation order, so results are bitwise
// identical regardless of thread count (tools/bench compares their speed).
enum class Exec { serial, parallel };

// Row-major storage so apply() walks contiguous memory per output row.
using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Y = A * X, parallel over output rows.
void dense_apply(const RowMat& a, const Eigen::MatrixXd& x, Eigen::MatrixXd& y,
                 Exec exec);
Eigen::MatrixXd dense_apply(const RowMat& a, const Eigen::MatrixXd& x,
                            Exec exec = Exec::parallel);

// All pairwise squared Euclidean distances, parallel over rows.
Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& points, Exec exec);

}  // namespace tbnn
