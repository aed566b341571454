#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "vtn/volterra.hpp"

namespace vtn {

/**
 * SISO Volterra system y(n) = sum_i (a_i^T u_n)^D, u_n = [1, u(n), ..., u(n-M+1)].
 * Column a_i of `a` (I x K, I = M + 1) decays as |alpha_i| exp(-beta_i * j), j = 1..I,
 * so the kernel vector is the column sum of the D-fold columnwise Kronecker power of A.
 */
struct SyntheticSystem {
    Eigen::MatrixXd a;
    Index order{1};
    Index memory{1};

    Eigen::MatrixXd simulate(const Eigen::MatrixXd& inputs) const;
    /// Dense kernel vector of length I^D; throws SizeError above `guard` entries.
    Eigen::VectorXd dense_kernel(Index guard = 200'000) const;
};

SyntheticSystem make_synthetic_system(Index order, Index memory, std::uint64_t seed, Index columns = 100);

struct SyntheticDataset {
    TimeSeriesData train;
    TimeSeriesData val;
    TimeSeriesData test;
    SyntheticSystem system;
};

/**
 * Simulates n_total samples of Gaussian white input and splits them
 * contiguously 2/3, 1/6, 1/6 (3000/750/750 for 4500). With `snr_db` set,
 * white noise at that output SNR is added to the outputs.
 */
SyntheticDataset generate_synthetic(Index order, Index memory, std::uint64_t seed, Index n_total = 4500,
                                    std::optional<double> snr_db = std::nullopt);

}  // namespace vtn
