#pragma once

#include <Eigen/Core>

namespace vtn {

/**
 * Minimum-norm least-squares solution of min ||a x - b||.
 *
 * SVD based; singular values below `rel_tol * sigma_max` are treated as zero.
 * With ridge > 0 the problem is augmented with sqrt(ridge) * I rows.
 * Throws NumericalError when the solution is not finite.
 */
Eigen::MatrixXd solve_min_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel_tol = 1e-12,
                               double ridge = 0.0);

}  // namespace vtn
