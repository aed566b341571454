#include "vtn/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "vtn/errors.hpp"

namespace vtn {

Eigen::MatrixXd SyntheticSystem::simulate(const Eigen::MatrixXd& inputs) const {
    if (inputs.cols() != 1) throw StructuralError("synthetic system is SISO");
    const Eigen::MatrixXd lagged = lagged_input_matrix(inputs, memory);
    const Eigen::ArrayXXd proj = (lagged * a).array();
    Eigen::ArrayXXd power = proj;
    for (Index d = 1; d < order; ++d) power *= proj;
    return power.rowwise().sum().matrix();
}

Eigen::VectorXd SyntheticSystem::dense_kernel(Index guard) const {
    const Index i = a.rows();
    double entries = 1.0;
    for (Index d = 0; d < order; ++d) entries *= static_cast<double>(i);
    if (entries > static_cast<double>(guard)) {
        throw SizeError("synthetic kernel has I^D = " + std::to_string(static_cast<long long>(entries)) +
                        " entries, above the dense guard");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Index>(entries));
    for (Index c = 0; c < a.cols(); ++c) {
        Eigen::VectorXd acc = a.col(c);
        for (Index d = 1; d < order; ++d) {
            Eigen::VectorXd next(acc.size() * i);
            // Later Kronecker factors vary slowest.
            for (Index k = 0; k < i; ++k) next.segment(k * acc.size(), acc.size()) = a(k, c) * acc;
            acc = std::move(next);
        }
        w += acc;
    }
    return w;
}

SyntheticSystem make_synthetic_system(Index order, Index memory, std::uint64_t seed, Index columns) {
    if (order < 1 || memory < 1 || columns < 1) {
        throw StructuralError("synthetic system: order, memory and column count must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(1.0, 10.0);
    const Index i = memory + 1;
    SyntheticSystem sys{Eigen::MatrixXd(i, columns), order, memory};
    for (Index c = 0; c < columns; ++c) {
        const double alpha = std::abs(normal(rng));
        const double beta = uniform(rng);
        for (Index j = 0; j < i; ++j) sys.a(j, c) = alpha * std::exp(-beta * static_cast<double>(j + 1));
    }
    return sys;
}

SyntheticDataset generate_synthetic(Index order, Index memory, std::uint64_t seed, Index n_total,
                                    std::optional<double> snr_db) {
    if (n_total < 6) throw StructuralError("generate_synthetic: need at least 6 samples");
    SyntheticSystem sys = make_synthetic_system(order, memory, seed);

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd u(n_total, 1);
    for (Index n = 0; n < n_total; ++n) u(n, 0) = normal(rng);
    Eigen::MatrixXd y = sys.simulate(u);
    if (snr_db) {
        const double signal = (y.array() - y.mean()).square().mean();
        const double sigma = std::sqrt(signal / std::pow(10.0, *snr_db / 10.0));
        for (Index n = 0; n < n_total; ++n) y(n, 0) += sigma * normal(rng);
    }

    const Index n_train = (2 * n_total) / 3;
    const Index n_val = (n_total - n_train) / 2;
    const Index n_test = n_total - n_train - n_val;
    TimeSeriesData all{u, y, DataRole::train};
    return SyntheticDataset{all.slice(0, n_train, DataRole::train), all.slice(n_train, n_val, DataRole::validation),
                            all.slice(n_train + n_val, n_test, DataRole::test), std::move(sys)};
}

}  // namespace vtn
