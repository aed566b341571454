#include "vtn/metrics.hpp"

#include <cmath>

#include "vtn/errors.hpp"

namespace vtn {

namespace {

void check_shapes(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat, Index skip) {
    if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) {
        throw StructuralError("metric: shape mismatch between reference and prediction");
    }
    if (skip < 0 || skip >= y.rows()) {
        throw StructuralError("metric: empty evaluation range (skip >= N)");
    }
}

double variance(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().mean();
}

}  // namespace

double rmse(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat, Index skip) {
    check_shapes(y, y_hat, skip);
    const Index count = y.rows() - skip;
    const auto diff = y.bottomRows(count) - y_hat.bottomRows(count);
    return std::sqrt(diff.squaredNorm() / static_cast<double>(count * y.cols()));
}

double vaf(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat, Index skip) {
    check_shapes(y, y_hat, skip);
    const Index count = y.rows() - skip;
    double total = 0.0;
    for (Index l = 0; l < y.cols(); ++l) {
        const Eigen::VectorXd target = y.col(l).tail(count);
        const double var_y = variance(target);
        if (!(var_y > 0.0)) {
            throw NumericalError("vaf: reference output " + std::to_string(l) + " has zero variance");
        }
        const Eigen::VectorXd err = target - y_hat.col(l).tail(count);
        total += 1.0 - variance(err) / var_y;
    }
    return total / static_cast<double>(y.cols());
}

}  // namespace vtn
