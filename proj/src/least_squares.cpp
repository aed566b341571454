#include "vtn/least_squares.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "vtn/errors.hpp"

namespace vtn {

Eigen::MatrixXd solve_min_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel_tol, double ridge) {
    if (a.rows() != b.rows()) {
        throw StructuralError("solve_min_norm: row count mismatch");
    }
    if (ridge < 0.0) {
        throw StructuralError("solve_min_norm: ridge must be >= 0");
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw NumericalError("solve_min_norm: non-finite input");
    }

    const Eigen::MatrixXd* lhs = &a;
    const Eigen::MatrixXd* rhs = &b;
    Eigen::MatrixXd a_aug, b_aug;
    if (ridge > 0.0) {
        a_aug.resize(a.rows() + a.cols(), a.cols());
        a_aug << a, std::sqrt(ridge) * Eigen::MatrixXd::Identity(a.cols(), a.cols());
        b_aug.resize(b.rows() + a.cols(), b.cols());
        b_aug << b, Eigen::MatrixXd::Zero(a.cols(), b.cols());
        lhs = &a_aug;
        rhs = &b_aug;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(*lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rel_tol);
    Eigen::MatrixXd x = svd.solve(*rhs);
    if (!x.allFinite()) {
        throw NumericalError("solve_min_norm: non-finite solution (rank " + std::to_string(svd.rank()) + " of " +
                             std::to_string(lhs->cols()) + " columns)");
    }
    return x;
}

}  // namespace vtn
