#include "vtn/increment.hpp"

#include <string>
#include <vector>

#include "vtn/errors.hpp"
#include "vtn/metrics.hpp"

namespace vtn {

Core3 qz_core(Index rank, Index mode) {
    Core3 core(rank, mode, rank);
    for (Index r = 0; r < rank; ++r) core(r, 0, r) = 1.0;
    return core;
}

Insertion insert_qz_core(const VolterraModel& model, InsertSide side) {
    const std::size_t site = model.site();
    std::vector<Core3> cores = model.tt().cores();
    const Core3& site_core = cores[site];
    std::size_t position = site;
    std::size_t new_site = site;
    if (side == InsertSide::left) {
        cores.insert(cores.begin() + static_cast<std::ptrdiff_t>(site), qz_core(site_core.left_rank(), site_core.mode_size()));
        new_site = site + 1;
    } else {
        position = site + 1;
        cores.insert(cores.begin() + static_cast<std::ptrdiff_t>(position),
                     qz_core(site_core.right_rank(), site_core.mode_size()));
    }
    // Q_Z is both left- and right-orthogonal, so the enlarged train stays canonical at the old site core.
    VolterraModel enlarged(TensorTrain(std::move(cores), new_site), model.memory(), model.inputs(),
                           model.direction(), model.site_fresh());
    return Insertion{std::move(enlarged), position};
}

VolterraModel canonicalize_insertion(const Insertion& insertion) {
    const VolterraModel& m = insertion.model;
    return m.with_tt(shift_canonical(m.tt(), insertion.position), false);
}

IncreaseOutcome increase_order(const VolterraModel& model, const TimeSeriesData& data, const AlsConfig& cfg) {
    data.validate();
    const Core3& site_core = model.tt().core(model.site());
    const InsertSide side =
        site_core.left_rank() >= site_core.right_rank() ? InsertSide::left : InsertSide::right;

    const Insertion ins = insert_qz_core(model, side);
    const VolterraModel lse = canonicalize_insertion(ins);
    const std::size_t p = ins.position;

    const Eigen::MatrixXd lagged = lagged_input_matrix(data.inputs, lse.memory());
    const Eigen::MatrixXd design = build_core_design_matrix(lse, lagged, p);
    const Core3& lse_core = lse.tt().core(p);
    const Eigen::VectorXd w_lse = lse_core.entries();
    Eigen::VectorXd w_new = solve_core(design, data.outputs, cfg);

    const Index n = data.samples();
    const Index l = data.output_channels();
    Eigen::VectorXd yb = design * w_lse;
    Eigen::VectorXd yd = design * (w_new - w_lse);

    IncreaseOutcome out{
        lse.with_tt(lse.tt().with_core(p, Core3(lse_core.left_rank(), lse_core.mode_size(), lse_core.right_rank(),
                                                std::move(w_new))),
                    true),
        Eigen::Map<const Eigen::MatrixXd>(yb.data(), n, l),
        Eigen::Map<const Eigen::MatrixXd>(yd.data(), n, l),
        0.0,
        IncreaseKind::order,
        true,
    };
    out.residual_vaf = vaf(data.outputs, out.y_base + out.y_delta) - vaf(data.outputs, out.y_base);
    return out;
}

VolterraModel pad_memory(const VolterraModel& model, Index memory_delta) {
    if (memory_delta < 0) {
        throw StructuralError("pad_memory: memory increase must be >= 0");
    }
    const Index extra = model.inputs() * memory_delta;
    std::vector<Core3> cores;
    cores.reserve(model.tt().order());
    for (const Core3& c : model.tt().cores()) {
        Core3 padded(c.left_rank(), c.mode_size() + extra, c.right_rank());
        for (Index s = 0; s < c.right_rank(); ++s) {
            for (Index i = 0; i < c.mode_size(); ++i) {
                for (Index r = 0; r < c.left_rank(); ++r) padded(r, i, s) = c(r, i, s);
            }
        }
        cores.push_back(std::move(padded));
    }
    return VolterraModel(TensorTrain(std::move(cores), model.tt().canonical_site()),
                         model.memory() + memory_delta, model.inputs(), model.direction(),
                         memory_delta == 0 && model.site_fresh());
}

IncreaseOutcome increase_memory(const VolterraModel& model, const TimeSeriesData& data, Index memory_delta,
                                const AlsConfig& cfg) {
    if (memory_delta < 0) {
        throw StructuralError("increase_memory: memory increase must be >= 0");
    }
    const Eigen::MatrixXd y_before = predict(model, data);
    if (memory_delta == 0) {
        return IncreaseOutcome{model, y_before, Eigen::MatrixXd::Zero(y_before.rows(), y_before.cols()), 0.0,
                               IncreaseKind::memory, true};
    }

    VolterraModel m = pad_memory(model, memory_delta);
    const Eigen::MatrixXd y_pre = predict(m, data);

    // Site core first, then the rest of the current sweep, then the other side.
    const std::size_t order = m.tt().order();
    const std::size_t site = m.site();
    std::vector<std::size_t> schedule{site};
    if (m.direction() == SweepDirection::left) {
        for (std::size_t k = site; k-- > 0;) schedule.push_back(k);
        for (std::size_t k = site + 1; k < order; ++k) schedule.push_back(k);
    } else {
        for (std::size_t k = site + 1; k < order; ++k) schedule.push_back(k);
        for (std::size_t k = site; k-- > 0;) schedule.push_back(k);
    }
    for (std::size_t k : schedule) {
        if (m.site() != k) m = m.with_tt(shift_canonical(m.tt(), k), false);
        m = als_core_update(m, data, k, cfg);
    }
    const std::size_t last = schedule.back();
    if (order > 1 && last == 0) m = m.with_direction(SweepDirection::right);
    if (order > 1 && last + 1 == order) m = m.with_direction(SweepDirection::left);

    const Eigen::MatrixXd y_post = predict(m, data);
    IncreaseOutcome out{m, y_pre, y_post - y_pre, 0.0, IncreaseKind::memory, true};
    out.residual_vaf = vaf(data.outputs, y_post) - vaf(data.outputs, y_pre);
    return out;
}

TtConstraints build_constraints_tt(Index rank, Index mode) {
    if (rank < 1 || mode < 2) {
        throw StructuralError("build_constraints_tt: need rank >= 1 and mode size >= 2");
    }
    const Index lags = mode - 1;
    const Index width = rank * mode * rank;
    TtConstraints out{Eigen::MatrixXd::Zero(rank * lags * rank, width), Eigen::MatrixXd::Zero(width, rank * rank),
                      Eigen::RowVectorXd::Zero(width)};
    // vec(core) index r + R*(i + I*s): (I_R (x) row-selector (x) I_R) with r fastest.
    Index row = 0;
    for (Index s = 0; s < rank; ++s) {
        for (Index i = 1; i < mode; ++i) {
            for (Index r = 0; r < rank; ++r) out.c(row++, r + rank * (i + mode * s)) = 1.0;
        }
    }
    out.indicator = out.c.colwise().sum();
    for (Index s = 0; s < rank; ++s) {
        for (Index r = 0; r < rank; ++r) out.z(r + rank * mode * s, r + rank * s) = 1.0;
    }
    return out;
}

}  // namespace vtn
