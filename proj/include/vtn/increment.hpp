#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "vtn/volterra.hpp"

namespace vtn {

enum class IncreaseKind { order, memory };

/// Result of one structure increase step.
struct IncreaseOutcome {
    VolterraModel model_after;
    /// Training predictions of the constrained (pre-increase) model.
    Eigen::MatrixXd y_base;
    /// Training predictions of the residual model; y_base + y_delta = predictions of model_after.
    Eigen::MatrixXd y_delta;
    /// VAF(y_base + y_delta) - VAF(y_base) on the training data.
    double residual_vaf{0.0};
    IncreaseKind kind{IncreaseKind::order};
    bool accepted{true};
};

/// Core of shape (rank, mode, rank) whose first lateral slice is the identity and the rest zero.
Core3 qz_core(Index rank, Index mode);

enum class InsertSide { left, right };

struct Insertion {
    VolterraModel model;
    /// Index of the inserted core in the enlarged train.
    std::size_t position;
};

/**
 * Inserts a Q_Z core next to the canonical site (left: bond R_left of the
 * site core, right: bond R_right). The represented D+1 weight vector is
 * Z * w_D, so the input-output behaviour is unchanged. The site stays on the
 * original site core.
 */
Insertion insert_qz_core(const VolterraModel& model, InsertSide side = InsertSide::left);

/// Moves the site onto the inserted core via one LQ (or QR) step; the site core is then W_LSE.
VolterraModel canonicalize_insertion(const Insertion& insertion);

/**
 * D -> D+1: insert, canonicalize, then lift the constraints with a single
 * ALS update of the inserted core. y_delta is evaluated from the core
 * difference over the shared frame.
 */
IncreaseOutcome increase_order(const VolterraModel& model, const TimeSeriesData& data, const AlsConfig& cfg);

/// Appends P*memory_delta zero slices (the new lags) to every core; outputs are unchanged.
VolterraModel pad_memory(const VolterraModel& model, Index memory_delta);

/**
 * M -> M + memory_delta: pad all cores, then D core updates (the site core
 * first, so the first update is the exact constraint lifting).
 */
IncreaseOutcome increase_memory(const VolterraModel& model, const TimeSeriesData& data, Index memory_delta,
                                const AlsConfig& cfg);

/// Constraint and nullspace matrices of the inserted core: C_TT * vec(core) = 0 selects the lag slices.
/// `indicator` is 1_R (x) [0 1_M] (x) 1_R, marking the constrained entries (the column sums of c).
struct TtConstraints {
    Eigen::MatrixXd c;
    Eigen::MatrixXd z;
    Eigen::RowVectorXd indicator;
};
TtConstraints build_constraints_tt(Index rank, Index mode);

}  // namespace vtn
