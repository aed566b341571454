#include "vtn/volterra.hpp"

#include <algorithm>
#include <string>

#include "vtn/errors.hpp"
#include "vtn/least_squares.hpp"

namespace vtn {

void TimeSeriesData::validate() const {
    if (inputs.rows() < 1) {
        throw StructuralError("TimeSeriesData: at least one sample required");
    }
    if (inputs.rows() != outputs.rows()) {
        throw StructuralError("TimeSeriesData: inputs and outputs have different sample counts");
    }
    if (inputs.cols() < 1 || outputs.cols() < 1) {
        throw StructuralError("TimeSeriesData: need at least one input and one output channel");
    }
    if (!inputs.allFinite() || !outputs.allFinite()) {
        throw NumericalError("TimeSeriesData: non-finite entries");
    }
}

TimeSeriesData TimeSeriesData::slice(Index first, Index count, DataRole new_role) const {
    if (first < 0 || count < 1 || first + count > samples()) {
        throw StructuralError("TimeSeriesData::slice: range out of bounds");
    }
    return TimeSeriesData{inputs.middleRows(first, count), outputs.middleRows(first, count), new_role};
}

VolterraModel::VolterraModel(TensorTrain tt, Index memory, Index inputs, SweepDirection direction, bool site_fresh)
    : tt_(std::move(tt)), memory_(memory), inputs_(inputs), direction_(direction), site_fresh_(site_fresh) {
    if (memory_ < 1 || inputs_ < 1) {
        throw StructuralError("VolterraModel: memory and input count must be >= 1");
    }
    for (const auto& c : tt_.cores()) {
        if (c.mode_size() != mode_size()) {
            throw StructuralError("VolterraModel: core mode size " + std::to_string(c.mode_size()) +
                                  " != P*M+1 = " + std::to_string(mode_size()));
        }
    }
}

Index VolterraModel::max_rank() const {
    auto r = tt_.ranks();
    return *std::max_element(r.begin(), r.end());
}

std::size_t VolterraModel::site() const {
    auto s = tt_.canonical_site();
    if (!s) {
        throw StructuralError("VolterraModel: weight train has no canonical site");
    }
    return *s;
}

VolterraModel VolterraModel::with_tt(TensorTrain tt, bool site_fresh) const {
    return VolterraModel(std::move(tt), memory_, inputs_, direction_, site_fresh);
}

VolterraModel VolterraModel::with_direction(SweepDirection direction) const {
    return VolterraModel(tt_, memory_, inputs_, direction, site_fresh_);
}

Eigen::MatrixXd lagged_input_matrix(const Eigen::MatrixXd& inputs, Index memory) {
    const Index n_samples = inputs.rows();
    const Index channels = inputs.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_samples, channels * memory + 1);
    out.col(0).setOnes();
    for (Index m = 0; m < memory; ++m) {
        for (Index p = 0; p < channels; ++p) {
            const Index col = 1 + m * channels + p;
            for (Index n = m; n < n_samples; ++n) {
                out(n, col) = inputs(n - m, p);
            }
        }
    }
    return out;
}

Eigen::VectorXd lagged_input(const TimeSeriesData& data, Index memory, Index n) {
    if (n < 0 || n >= data.samples()) {
        throw StructuralError("lagged_input: sample index out of range");
    }
    const Index channels = data.input_channels();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(channels * memory + 1);
    u[0] = 1.0;
    for (Index m = 0; m < memory && n - m >= 0; ++m) {
        for (Index p = 0; p < channels; ++p) {
            u[1 + m * channels + p] = data.inputs(n - m, p);
        }
    }
    return u;
}

namespace {

// Row n holds vec(core x_2 u_n), an R_left x R_right matrix in column-major order.
Eigen::MatrixXd mode2_all(const Core3& core, const Eigen::MatrixXd& lagged) {
    const Index rl = core.left_rank();
    const Index rr = core.right_rank();
    Eigen::MatrixXd slices(core.mode_size(), rl * rr);
    for (Index s = 0; s < rr; ++s) {
        for (Index i = 0; i < core.mode_size(); ++i) {
            for (Index r = 0; r < rl; ++r) {
                slices(i, r + rl * s) = core(r, i, s);
            }
        }
    }
    return lagged * slices;
}

void check_lagged(const VolterraModel& model, const Eigen::MatrixXd& lagged) {
    if (lagged.cols() != model.mode_size()) {
        throw StructuralError("lagged input width " + std::to_string(lagged.cols()) + " != model mode size " +
                              std::to_string(model.mode_size()));
    }
}

void check_data(const VolterraModel& model, const TimeSeriesData& data) {
    data.validate();
    if (data.input_channels() != model.inputs()) {
        throw StructuralError("data has " + std::to_string(data.input_channels()) + " inputs, model expects " +
                              std::to_string(model.inputs()));
    }
    if (data.output_channels() != model.outputs()) {
        throw StructuralError("data has " + std::to_string(data.output_channels()) + " outputs, model expects " +
                              std::to_string(model.outputs()));
    }
}

// acc (rows of vec(a x b) matrices) times per-sample (b x c) matrices.
Eigen::MatrixXd chain_right(const Eigen::MatrixXd& acc, Index a, Index b, const Eigen::MatrixXd& factors, Index c) {
    const Index n_samples = acc.rows();
    Eigen::MatrixXd out(n_samples, a * c);
    for (Index n = 0; n < n_samples; ++n) {
        for (Index k = 0; k < c; ++k) {
            for (Index i = 0; i < a; ++i) {
                double sum = 0.0;
                for (Index j = 0; j < b; ++j) {
                    sum += acc(n, i + a * j) * factors(n, j + b * k);
                }
                out(n, i + a * k) = sum;
            }
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXd predict(const VolterraModel& model, const Eigen::MatrixXd& inputs) {
    if (inputs.cols() != model.inputs()) {
        throw StructuralError("predict: input channel count mismatch");
    }
    const Eigen::MatrixXd lagged = lagged_input_matrix(inputs, model.memory());
    const TensorTrain& tt = model.tt();
    const Index outputs = model.outputs();
    Eigen::MatrixXd acc = mode2_all(tt.core(0), lagged);
    for (std::size_t k = 1; k < tt.order(); ++k) {
        const Core3& c = tt.core(k);
        acc = chain_right(acc, outputs, c.left_rank(), mode2_all(c, lagged), c.right_rank());
    }
    return acc;  // N x (L * 1)
}

Eigen::MatrixXd predict(const VolterraModel& model, const TimeSeriesData& data) {
    check_data(model, data);
    return predict(model, data.inputs);
}

PartialContractions partial_contractions(const VolterraModel& model, const Eigen::MatrixXd& lagged, std::size_t d) {
    check_lagged(model, lagged);
    const TensorTrain& tt = model.tt();
    if (d >= tt.order()) {
        throw StructuralError("partial_contractions: core index out of range");
    }
    const Index n_samples = lagged.rows();
    const Index outputs = model.outputs();

    PartialContractions pc;
    if (d == 0) {
        Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(outputs, outputs);
        pc.left = Eigen::Map<const Eigen::RowVectorXd>(eye.data(), eye.size()).replicate(n_samples, 1);
    } else {
        pc.left = mode2_all(tt.core(0), lagged);
        for (std::size_t k = 1; k < d; ++k) {
            const Core3& c = tt.core(k);
            pc.left = chain_right(pc.left, outputs, c.left_rank(), mode2_all(c, lagged), c.right_rank());
        }
    }

    const std::size_t last = tt.order() - 1;
    if (d == last) {
        pc.right = Eigen::MatrixXd::Ones(n_samples, 1);
    } else {
        pc.right = mode2_all(tt.core(last), lagged);  // R_last x 1 per sample
        for (std::size_t k = last; k-- > d + 1;) {
            const Core3& c = tt.core(k);
            // G_k(u_n) (R_k x R_{k+1}) times right_n (R_{k+1}).
            Eigen::MatrixXd g = mode2_all(c, lagged);
            Eigen::MatrixXd next(n_samples, c.left_rank());
            for (Index n = 0; n < n_samples; ++n) {
                for (Index r = 0; r < c.left_rank(); ++r) {
                    double sum = 0.0;
                    for (Index s = 0; s < c.right_rank(); ++s) {
                        sum += g(n, r + c.left_rank() * s) * pc.right(n, s);
                    }
                    next(n, r) = sum;
                }
            }
            pc.right = std::move(next);
        }
    }
    return pc;
}

Eigen::MatrixXd build_core_design_matrix(const VolterraModel& model, const Eigen::MatrixXd& lagged, std::size_t d) {
    if (model.tt().canonical_site() != d) {
        throw StructuralError("build_core_design_matrix: model is not in site-" + std::to_string(d) +
                              " canonical form");
    }
    const PartialContractions pc = partial_contractions(model, lagged, d);
    const Core3& core = model.tt().core(d);
    const Index rl = core.left_rank();
    const Index modes = core.mode_size();
    const Index rr = core.right_rank();
    const Index n_samples = lagged.rows();
    const Index outputs = model.outputs();

    Eigen::MatrixXd design(n_samples * outputs, core.size());
    for (Index s = 0; s < rr; ++s) {
        for (Index i = 0; i < modes; ++i) {
            for (Index r = 0; r < rl; ++r) {
                const Index col = r + rl * (i + modes * s);
                for (Index l = 0; l < outputs; ++l) {
                    auto block = design.col(col).segment(l * n_samples, n_samples);
                    block = pc.left.col(l + outputs * r).cwiseProduct(lagged.col(i)).cwiseProduct(pc.right.col(s));
                }
            }
        }
    }
    return design;
}

Eigen::MatrixXd build_core_design_matrix(const VolterraModel& model, const TimeSeriesData& data, std::size_t d) {
    check_data(model, data);
    return build_core_design_matrix(model, lagged_input_matrix(data.inputs, model.memory()), d);
}

Eigen::VectorXd solve_core(const Eigen::MatrixXd& design, const Eigen::MatrixXd& outputs, const AlsConfig& cfg) {
    const Eigen::Map<const Eigen::VectorXd> rhs(outputs.data(), outputs.size());
    if (design.rows() != rhs.size()) {
        throw StructuralError("solve_core: design rows do not match N*L");
    }
    Eigen::VectorXd x = solve_min_norm(design, rhs, cfg.solver_tolerance, cfg.ridge);
    if (!x.allFinite()) {
        throw NumericalError("solve_core: non-finite core solution");
    }
    return x;
}

VolterraModel als_core_update(const VolterraModel& model, const TimeSeriesData& data, std::size_t d,
                              const AlsConfig& cfg) {
    const Eigen::MatrixXd design = build_core_design_matrix(model, data, d);
    Eigen::VectorXd x = solve_core(design, data.outputs, cfg);
    const Core3& old = model.tt().core(d);
    Core3 updated(old.left_rank(), old.mode_size(), old.right_rank(), std::move(x));
    return model.with_tt(model.tt().with_core(d, std::move(updated)), true);
}

namespace {

VolterraModel advance_site(const VolterraModel& model) {
    const std::size_t order = model.tt().order();
    const std::size_t site = model.site();
    if (order == 1) return model;
    SweepDirection dir = model.direction();
    if (dir == SweepDirection::left && site == 0) dir = SweepDirection::right;
    if (dir == SweepDirection::right && site + 1 == order) dir = SweepDirection::left;
    const std::size_t next = dir == SweepDirection::left ? site - 1 : site + 1;
    return VolterraModel(shift_canonical(model.tt(), next), model.memory(), model.inputs(), dir, false);
}

}  // namespace

AlsRun als_run(const VolterraModel& model, const TimeSeriesData& data, std::size_t num_core_updates,
               const AlsConfig& cfg) {
    check_data(model, data);
    const Eigen::MatrixXd lagged = lagged_input_matrix(data.inputs, model.memory());
    const Eigen::Map<const Eigen::VectorXd> target(data.outputs.data(), data.outputs.size());

    AlsRun run{model, {}};
    run.residual_history.reserve(num_core_updates);
    if (!run.model.tt().canonical_site()) {
        run.model = run.model.with_tt(shift_canonical(run.model.tt(), run.model.order() - 1), false);
    }
    for (std::size_t step = 0; step < num_core_updates; ++step) {
        if (run.model.site_fresh()) run.model = advance_site(run.model);
        const std::size_t d = run.model.site();
        const Eigen::MatrixXd design = build_core_design_matrix(run.model, lagged, d);
        Eigen::VectorXd x = solve_core(design, data.outputs, cfg);
        run.residual_history.push_back((target - design * x).norm());
        const Core3& old = run.model.tt().core(d);
        Core3 updated(old.left_rank(), old.mode_size(), old.right_rank(), std::move(x));
        run.model = run.model.with_tt(run.model.tt().with_core(d, std::move(updated)), true);
    }
    return run;
}

double training_residual(const VolterraModel& model, const TimeSeriesData& data) {
    return (data.outputs - predict(model, data)).norm();
}

}  // namespace vtn
