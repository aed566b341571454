#pragma once

#include <Eigen/Core>

#include "vtn/tensor_train.hpp"

namespace vtn {

/// Root mean squared error over samples [skip, N), pooled over all outputs.
double rmse(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat, Index skip = 0);

/// Variance accounted for, 1 - var(y - y_hat) / var(y), per output over [skip, N), averaged over outputs.
/// Throws NumericalError when an output has zero variance on the evaluated range.
double vaf(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat, Index skip = 0);

}  // namespace vtn
