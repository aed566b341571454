#include "vtn/selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "vtn/errors.hpp"
#include "vtn/least_squares.hpp"
#include "vtn/metrics.hpp"

namespace vtn {

void SelectionConfig::validate() const {
    if (d_range.size() == 0 || m_range.size() == 0) throw StructuralError("selection: empty D or M range");
    if (d_range.lo < 1 || m_range.lo < 1) throw StructuralError("selection: D and M must be >= 1");
    if (rank < 1) throw StructuralError("selection: rank must be >= 1");
    if (m_delta < 1) throw StructuralError("selection: M_delta must be >= 1");
    if (transient_skip && *transient_skip < 0) throw StructuralError("selection: transient skip must be >= 0");
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Columns i1 + I*i2 hold u[i1] * u[i2].
Eigen::MatrixXd kron_square_rows(const Eigen::MatrixXd& lagged) {
    const Index n = lagged.rows();
    const Index i = lagged.cols();
    Eigen::MatrixXd out(n, i * i);
    for (Index b = 0; b < i; ++b) {
        out.middleCols(b * i, i) = lagged.array().colwise() * lagged.col(b).array();
    }
    return out;
}

// Pseudo-inverse solve of a symmetric PSD system; eigenvalues below rel_cut * max are dropped.
Eigen::MatrixXd psd_pinv_solve(const Eigen::MatrixXd& g, const Eigen::MatrixXd& rhs, double rel_cut) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    if (eig.info() != Eigen::Success) throw NumericalError("deterministic_init: eigendecomposition failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double cut = rel_cut * std::max(lambda.maxCoeff(), 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
    for (Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k) > cut && lambda(k) > 0.0) inv(k) = 1.0 / lambda(k);
    }
    const Eigen::MatrixXd& v = eig.eigenvectors();
    return v * inv.asDiagonal() * (v.transpose() * rhs);
}

// Dense min-norm order-2 weights, one I x I matrix per output, stacked as (L*I x I) with row l + L*i1.
Eigen::MatrixXd dense_order2_weights(const Eigen::MatrixXd& lagged, const Eigen::MatrixXd& y, const InitConfig& cfg) {
    const Index n = lagged.rows();
    const Index i = lagged.cols();
    const Index l = y.cols();
    const Index features = i * i;
    if (features > cfg.dense_guard) {
        throw SizeError("deterministic_init: I^2 = " + std::to_string(features) + " exceeds the dense guard " +
                        std::to_string(cfg.dense_guard) + "; use random initialization");
    }
    const double eig_cut = std::max(cfg.tolerance * cfg.tolerance, 1e-14);
    Eigen::MatrixXd w(features, l);
    if (n >= features && n * features <= cfg.dense_guard) {
        const Eigen::MatrixXd u2 = kron_square_rows(lagged);
        for (Index c = 0; c < l; ++c) w.col(c) = solve_min_norm(u2, y.col(c), cfg.tolerance);
    } else if (n >= features) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(features, features);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(features, l);
        const Index block = std::max<Index>(1, cfg.dense_guard / std::max<Index>(features, 1));
        for (Index start = 0; start < n; start += block) {
            const Index count = std::min(block, n - start);
            const Eigen::MatrixXd u2 = kron_square_rows(lagged.middleRows(start, count));
            gram.selfadjointView<Eigen::Lower>().rankUpdate(u2.transpose());
            rhs += u2.transpose() * y.middleRows(start, count);
        }
        gram = gram.selfadjointView<Eigen::Lower>();
        w = psd_pinv_solve(gram, rhs, eig_cut);
    } else {
        // Underdetermined: the min-norm solution lies in the row space, w = U2^T alpha with K = U2 U2^T.
        const Eigen::MatrixXd inner = lagged * lagged.transpose();
        const Eigen::MatrixXd k = inner.array().square().matrix();
        const Eigen::MatrixXd alpha = psd_pinv_solve(k, y, eig_cut);
        for (Index c = 0; c < l; ++c) {
            const Eigen::MatrixXd wc = lagged.transpose() * alpha.col(c).asDiagonal() * lagged;
            w.col(c) = Eigen::Map<const Eigen::VectorXd>(wc.data(), features);
        }
    }
    if (!w.allFinite()) throw NumericalError("deterministic_init: non-finite dense solution");

    Eigen::MatrixXd stacked(l * i, i);
    for (Index c = 0; c < l; ++c) {
        for (Index i2 = 0; i2 < i; ++i2) {
            for (Index i1 = 0; i1 < i; ++i1) stacked(c + l * i1, i2) = w(i1 + i * i2, c);
        }
    }
    return stacked;
}

Index default_skip(const SelectionConfig& cfg, Index memory) {
    return cfg.transient_skip.value_or(std::max<Index>(memory - 1, 0));
}

TraceRecord make_record(const VolterraModel& model, const TimeSeriesData& train, const TimeSeriesData* val,
                        Index skip, std::size_t sweeps_used, double vaf_residual, double wall_ms) {
    TraceRecord rec;
    rec.order = model.order();
    rec.memory = model.memory();
    rec.sweeps_used = sweeps_used;
    rec.rmse_train = rmse(train.outputs, predict(model, train), skip);
    rec.rmse_val = val ? rmse(val->outputs, predict(model, *val), skip) : std::numeric_limits<double>::quiet_NaN();
    rec.vaf_residual = vaf_residual;
    rec.weight_norm = tt_norm(model.tt());
    rec.wall_time_ms = wall_ms;
    return rec;
}

bool better(const TraceRecord& a, const TraceRecord& b) {
    if (a.rmse_val != b.rmse_val) return a.rmse_val < b.rmse_val;
    if (a.order != b.order) return a.order < b.order;
    return a.memory < b.memory;
}

VolterraModel initial_model(const TimeSeriesData& train, Index memory, Index order, const SelectionConfig& cfg) {
    if (cfg.init == InitKind::deterministic) {
        return deterministic_init(train, memory, cfg.rank, std::min<Index>(order, 2),
                                  InitConfig{cfg.als.solver_tolerance, cfg.dense_guard});
    }
    return random_init(memory, cfg.rank, order, cfg.seed, train.input_channels(), train.output_channels());
}

VolterraModel run_sweeps(const VolterraModel& model, const TimeSeriesData& data, std::size_t sweeps,
                         const AlsConfig& als) {
    if (sweeps == 0) return model;
    return als_run(model, data, sweeps, als).model;
}

struct PathResult {
    std::vector<TraceRecord> records;
    std::optional<VolterraModel> best_model;
    std::optional<TraceRecord> best;
};

PathResult grid_path(const TimeSeriesData& train, const TimeSeriesData& val, Index memory,
                     const SelectionConfig& cfg) {
    PathResult out;
    auto start = Clock::now();
    const Index first_order = cfg.init == InitKind::deterministic ? std::min<Index>(cfg.d_range.lo, 2)
                                                                   : cfg.d_range.lo;
    VolterraModel model = initial_model(train, memory, first_order, cfg);
    const Index skip = *cfg.transient_skip;
    double vaf_residual = 0.0;
    bool first = true;
    while (true) {
        if (!first) {
            const IncreaseOutcome inc = increase_order(model, train, cfg.als);
            model = inc.model_after;
            vaf_residual = inc.residual_vaf;
        }
        first = false;
        model = run_sweeps(model, train, cfg.sweeps, cfg.als);
        if (cfg.d_range.contains(model.order())) {
            TraceRecord rec = make_record(model, train, &val, skip, cfg.sweeps,
                                          vaf_residual, elapsed_ms(start));
            if (!out.best || better(rec, *out.best)) {
                out.best = rec;
                out.best_model = model;
            }
            out.records.push_back(rec);
            start = Clock::now();
        }
        if (model.order() >= cfg.d_range.hi) break;
    }
    return out;
}

}  // namespace

VolterraModel deterministic_init(const TimeSeriesData& data, Index memory, Index rank, Index order,
                                 const InitConfig& cfg) {
    data.validate();
    if (memory < 1 || rank < 1) throw StructuralError("deterministic_init: memory and rank must be >= 1");
    if (order != 1 && order != 2) throw StructuralError("deterministic_init: order must be 1 or 2");
    const Eigen::MatrixXd lagged = lagged_input_matrix(data.inputs, memory);
    const Index i = lagged.cols();
    const Index l = data.output_channels();
    const Index p = data.input_channels();

    if (order == 1) {
        Eigen::MatrixXd w(i, l);
        for (Index c = 0; c < l; ++c) w.col(c) = solve_min_norm(lagged, data.outputs.col(c), cfg.tolerance);
        if (!w.allFinite()) throw NumericalError("deterministic_init: non-finite dense solution");
        Eigen::MatrixXd wt = w.transpose();  // (L x I): entry (l, i) at l + L*i
        Core3 core(l, i, 1, Eigen::Map<const Eigen::VectorXd>(wt.data(), wt.size()));
        return VolterraModel(TensorTrain({std::move(core)}, 0), memory, p, SweepDirection::right, false);
    }

    const Eigen::MatrixXd stacked = dense_order2_weights(lagged, data.outputs, cfg);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index r = std::min<Index>(rank, svd.singularValues().size());
    const Eigen::MatrixXd left = svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal();
    const Eigen::MatrixXd right = svd.matrixV().leftCols(r).transpose();
    std::vector<Core3> cores;
    cores.push_back(Core3::from_left_unfolding(left, i));
    cores.push_back(Core3::from_right_unfolding(right, i));
    // Vᵀ has orthonormal rows, so the train is already canonical at core 0.
    return VolterraModel(TensorTrain(std::move(cores), 0), memory, p, SweepDirection::right, false);
}

VolterraModel random_init(Index memory, Index rank, Index order, std::uint64_t seed, Index inputs, Index outputs) {
    if (memory < 1 || rank < 1 || order < 1 || inputs < 1 || outputs < 1) {
        throw StructuralError("random_init: memory, rank, order, inputs and outputs must be >= 1");
    }
    const Index i = inputs * memory + 1;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Core3> cores;
    for (Index k = 0; k < order; ++k) {
        const Index rl = k == 0 ? outputs : rank;
        const Index rr = k + 1 == order ? 1 : rank;
        Core3 core(rl, i, rr);
        for (Index e = 0; e < core.size(); ++e) core.entries()(e) = normal(rng);
        cores.push_back(std::move(core));
    }
    TensorTrain tt = shift_canonical(TensorTrain(std::move(cores)), static_cast<std::size_t>(order - 1));
    return VolterraModel(std::move(tt), memory, inputs, SweepDirection::left, false);
}

GrowResult grow_to(const VolterraModel& model, const TimeSeriesData& train, const TimeSeriesData* val,
                   Index target_order, const SelectionConfig& cfg) {
    if (target_order < model.order()) throw StructuralError("grow_to: target order below current order");
    const Index skip = default_skip(cfg, model.memory());
    auto start = Clock::now();
    GrowResult out{run_sweeps(model, train, cfg.sweeps, cfg.als), {}};
    out.trace.records.push_back(make_record(out.model, train, val, skip, cfg.sweeps, 0.0, elapsed_ms(start)));
    while (out.model.order() < target_order) {
        start = Clock::now();
        const IncreaseOutcome inc = increase_order(out.model, train, cfg.als);
        out.model = run_sweeps(inc.model_after, train, cfg.sweeps, cfg.als);
        out.trace.records.push_back(
            make_record(out.model, train, val, skip, cfg.sweeps, inc.residual_vaf, elapsed_ms(start)));
    }
    const TraceRecord& last = out.trace.records.back();
    out.trace.chosen = ChosenStructure{last.order, last.memory, cfg.sweeps};
    out.trace.chosen_model = out.model;
    return out;
}

SelectionTrace grid_search(const TimeSeriesData& train, const TimeSeriesData& val, const SelectionConfig& cfg_in) {
    cfg_in.validate();
    SelectionConfig cfg = cfg_in;
    cfg.transient_skip = default_skip(cfg_in, cfg_in.m_range.hi);

    const Index count = cfg.m_range.size();
    std::vector<PathResult> paths(static_cast<std::size_t>(count));
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(count)));
    if (workers == 1) {
        for (Index k = 0; k < count; ++k) paths[k] = grid_path(train, val, cfg.m_range.lo + k, cfg);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (Index k = w; k < count; k += workers) paths[k] = grid_path(train, val, cfg.m_range.lo + k, cfg);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    SelectionTrace trace;
    std::optional<TraceRecord> best;
    for (PathResult& p : paths) {
        trace.records.insert(trace.records.end(), p.records.begin(), p.records.end());
        if (p.best && (!best || better(*p.best, *best))) {
            best = p.best;
            trace.chosen_model = std::move(p.best_model);
        }
    }
    std::sort(trace.records.begin(), trace.records.end(), [](const TraceRecord& a, const TraceRecord& b) {
        return a.memory != b.memory ? a.memory < b.memory : a.order < b.order;
    });
    trace.chosen = ChosenStructure{best->order, best->memory, cfg.sweeps};
    return trace;
}

SelectionTrace auto_select(const TimeSeriesData& train, const TimeSeriesData& val, const SelectionConfig& cfg_in) {
    cfg_in.validate();
    SelectionConfig cfg = cfg_in;
    cfg.transient_skip = default_skip(cfg_in, cfg_in.m_range.hi);
    const Index skip = *cfg.transient_skip;

    auto start = Clock::now();
    VolterraModel model = initial_model(train, cfg.m_range.lo, 2, cfg);
    model = run_sweeps(model, train, cfg.sweeps, cfg.als);
    while (model.order() < cfg.d_range.lo) {
        model = run_sweeps(increase_order(model, train, cfg.als).model_after, train, cfg.sweeps, cfg.als);
    }

    SelectionTrace trace;
    TraceRecord best = make_record(model, train, &val, skip, cfg.sweeps, 0.0, elapsed_ms(start));
    trace.records.push_back(best);
    trace.chosen_model = model;

    while (true) {
        start = Clock::now();
        std::optional<IncreaseOutcome> by_order;
        std::optional<IncreaseOutcome> by_memory;
        if (model.order() + 1 <= cfg.d_range.hi) by_order = increase_order(model, train, cfg.als);
        if (model.memory() + cfg.m_delta <= cfg.m_range.hi) {
            by_memory = increase_memory(model, train, cfg.m_delta, cfg.als);
        }
        const IncreaseOutcome* pick = nullptr;
        if (by_order && by_order->residual_vaf >= cfg.accept_threshold) pick = &*by_order;
        if (by_memory && by_memory->residual_vaf >= cfg.accept_threshold &&
            (!pick || by_memory->residual_vaf > pick->residual_vaf)) {
            pick = &*by_memory;
        }
        if (!pick) break;

        model = run_sweeps(pick->model_after, train, cfg.sweeps, cfg.als);
        TraceRecord rec = make_record(model, train, &val, skip, cfg.sweeps, pick->residual_vaf, elapsed_ms(start));
        trace.records.push_back(rec);
        if (better(rec, best)) {
            best = rec;
            trace.chosen_model = model;
        }
    }
    trace.chosen = ChosenStructure{best.order, best.memory, cfg.sweeps};
    return trace;
}

std::size_t growth_update_budget(Index order, std::size_t sweeps) {
    const std::size_t steps = order > 2 ? static_cast<std::size_t>(order - 2) : 0;
    return std::max<std::size_t>(sweeps + steps * (sweeps + 1), static_cast<std::size_t>(std::max<Index>(order, 1)));
}

}  // namespace vtn
