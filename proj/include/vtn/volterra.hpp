#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "vtn/tensor_train.hpp"

namespace vtn {

enum class DataRole { train, validation, test };

/// Input matrix (N x P) and output matrix (N x L) sampled on a common grid.
struct TimeSeriesData {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd outputs;
    DataRole role{DataRole::train};

    Index samples() const { return inputs.rows(); }
    Index input_channels() const { return inputs.cols(); }
    Index output_channels() const { return outputs.cols(); }

    /// Throws StructuralError / NumericalError if the invariants do not hold.
    void validate() const;
    /// Rows [first, first + count).
    TimeSeriesData slice(Index first, Index count, DataRole role) const;
};

enum class SweepDirection { left, right };

/**
 * Truncated MIMO Volterra model in tensor-train form.
 *
 * Every core has mode size I = P*M + 1 and the weight train has boundary
 * ranks (L, 1). The canonical site is the next core ALS works on; when
 * `site_fresh` is set the site core is the exact LS optimum of its frame
 * (it was the last core updated), which the increase steps rely on.
 */
class VolterraModel {
public:
    VolterraModel(TensorTrain tt, Index memory, Index inputs, SweepDirection direction = SweepDirection::left,
                  bool site_fresh = false);

    const TensorTrain& tt() const { return tt_; }
    Index order() const { return static_cast<Index>(tt_.order()); }
    Index memory() const { return memory_; }
    Index inputs() const { return inputs_; }
    Index outputs() const { return tt_.outputs(); }
    Index mode_size() const { return inputs_ * memory_ + 1; }
    Index max_rank() const;

    SweepDirection direction() const { return direction_; }
    bool site_fresh() const { return site_fresh_; }
    std::size_t site() const;

    VolterraModel with_tt(TensorTrain tt, bool site_fresh) const;
    VolterraModel with_direction(SweepDirection direction) const;

private:
    TensorTrain tt_;
    Index memory_;
    Index inputs_;
    SweepDirection direction_;
    bool site_fresh_;
};

struct AlsConfig {
    double ridge{0.0};
    double solver_tolerance{1e-12};
    SweepDirection sweep_direction_start{SweepDirection::left};
};

/// u_n = [1, u(n), u(n-1), ..., u(n-M+1)] with all P channels per lag; pre-sample inputs are 0.
Eigen::VectorXd lagged_input(const TimeSeriesData& data, Index memory, Index n);

/// All lagged input vectors stacked row-wise (N x (P*M+1)).
Eigen::MatrixXd lagged_input_matrix(const Eigen::MatrixXd& inputs, Index memory);

/// Model outputs (N x L) via chained mode-2 contractions.
Eigen::MatrixXd predict(const VolterraModel& model, const TimeSeriesData& data);
Eigen::MatrixXd predict(const VolterraModel& model, const Eigen::MatrixXd& inputs);

/**
 * Per-sample contractions of all cores left and right of core d.
 *
 * Row n of `left` holds the L x R_d matrix (column-major) obtained by
 * contracting cores 0..d-1 with u_n; row n of `right` holds the R_{d+1}
 * vector from cores d+1..D-1.
 */
struct PartialContractions {
    Eigen::MatrixXd left;
    Eigen::MatrixXd right;
};
PartialContractions partial_contractions(const VolterraModel& model, const Eigen::MatrixXd& lagged, std::size_t d);

/**
 * Design matrix (N*L x R_d*I*R_{d+1}) of the single-core LS problem at core d.
 *
 * Row n + N*l is (w_right^T (x) u_n^T (x) w_left[l, :]), so that
 * design * vec(core d) = vec(predictions). The model must be in site-d form.
 */
Eigen::MatrixXd build_core_design_matrix(const VolterraModel& model, const TimeSeriesData& data, std::size_t d);
Eigen::MatrixXd build_core_design_matrix(const VolterraModel& model, const Eigen::MatrixXd& lagged, std::size_t d);

/// Minimum-norm (optionally ridge) solve of design * x = vec(outputs).
Eigen::VectorXd solve_core(const Eigen::MatrixXd& design, const Eigen::MatrixXd& outputs, const AlsConfig& cfg);

/// Replaces core d (the canonical site) by its LS optimum given the frame.
VolterraModel als_core_update(const VolterraModel& model, const TimeSeriesData& data, std::size_t d,
                              const AlsConfig& cfg);

struct AlsRun {
    VolterraModel model;
    std::vector<double> residual_history;
};

/**
 * Zig-zag ALS: each step moves the site one core in the sweep direction
 * (bouncing at the ends; a stale site is updated in place first) and solves
 * for that core. History holds the training residual norm after each update.
 */
AlsRun als_run(const VolterraModel& model, const TimeSeriesData& data, std::size_t num_core_updates,
               const AlsConfig& cfg);

/// ||Y - Yhat||_F on all samples.
double training_residual(const VolterraModel& model, const TimeSeriesData& data);

}  // namespace vtn
