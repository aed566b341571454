#include <gtest/gtest.h>

#include <Eigen/Cholesky>

#include "dense_oracle.hpp"
#include "test_util.hpp"
#include "vtn/errors.hpp"
#include "vtn/selection.hpp"
#include "vtn/volterra.hpp"

using namespace vtn;
using vtn::testing::random_matrix;
using vtn::testing::random_tt;
using vtn::testing::rel_diff;

namespace {

TimeSeriesData siso(const Eigen::VectorXd& u, const Eigen::VectorXd& y) { return TimeSeriesData{u, y}; }

TimeSeriesData noise_data(Index n, Index p, Index l, std::uint64_t seed) {
    return TimeSeriesData{random_matrix(n, p, seed), random_matrix(n, l, seed + 1)};
}

VolterraModel random_model(Index order, Index memory, Index rank, std::uint64_t seed, Index p = 1, Index l = 1) {
    return VolterraModel(random_tt(order, p * memory + 1, rank, seed, l), memory, p);
}

}  // namespace

TEST(LaggedInput, ReadsLagsMostRecentFirst) {
    const Eigen::Vector3d u(1, 2, 3);
    const TimeSeriesData d = siso(u, u);
    EXPECT_EQ(lagged_input(d, 2, 2), Eigen::Vector3d(1, 3, 2));
}

TEST(LaggedInput, PadsPreSampleInputsWithZero) {
    Eigen::VectorXd u(1);
    u << 5;
    EXPECT_EQ(lagged_input(siso(u, u), 3, 0), Eigen::Vector4d(1, 5, 0, 0));
}

TEST(LaggedInput, StacksChannelsPerLag) {
    Eigen::MatrixXd u(1, 2);
    u << 7, 8;
    TimeSeriesData d{u, Eigen::MatrixXd::Zero(1, 1)};
    EXPECT_EQ(lagged_input(d, 1, 0), Eigen::Vector3d(1, 7, 8));
    const Eigen::MatrixXd u2 = random_matrix(6, 2, 1);
    const Eigen::MatrixXd all = lagged_input_matrix(u2, 3);
    TimeSeriesData d2{u2, Eigen::MatrixXd::Zero(6, 1)};
    for (Index n = 0; n < 6; ++n) EXPECT_EQ(all.row(n).transpose(), lagged_input(d2, 3, n));
}

TEST(TimeSeriesData, ValidatesShapesAndValues) {
    TimeSeriesData bad{Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(2, 1)};
    EXPECT_THROW(bad.validate(), StructuralError);
    TimeSeriesData nan{Eigen::MatrixXd::Constant(2, 1, std::nan("")), Eigen::MatrixXd::Zero(2, 1)};
    EXPECT_THROW(nan.validate(), NumericalError);
}

TEST(VolterraModel, RequiresModeSizeMatchingMemory) {
    EXPECT_THROW(VolterraModel(random_tt(2, 4, 2, 1), 2, 1), StructuralError);
    EXPECT_NO_THROW(VolterraModel(random_tt(2, 3, 2, 1), 2, 1));
}

TEST(Predict, ZeroModelGivesZeroOutputs) {
    const VolterraModel m(TensorTrain({Core3(1, 3, 2), Core3(2, 3, 1)}), 2, 1);
    EXPECT_EQ(predict(m, noise_data(10, 1, 1, 2)).norm(), 0.0);
}

TEST(Predict, OrderOneIsFirWithBias) {
    const VolterraModel m = random_model(1, 3, 1, 3);
    const TimeSeriesData d = noise_data(12, 1, 1, 4);
    const Eigen::VectorXd w = m.tt().core(0).entries();
    const Eigen::MatrixXd expected = lagged_input_matrix(d.inputs, 3) * w;
    EXPECT_LT(rel_diff(predict(m, d), expected), 1e-14);
}

TEST(Predict, MatchesDenseKroneckerOracle) {
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        const Index order = 1 + static_cast<Index>(seed % 4);
        const Index memory = 1 + static_cast<Index>(seed % 3);
        const Index rank = 1 + static_cast<Index>((seed / 2) % 3);
        const Index outputs = 1 + static_cast<Index>(seed % 2);
        const VolterraModel m = random_model(order, memory, rank, seed, 1, outputs);
        const TimeSeriesData d = noise_data(20 + static_cast<Index>(seed), 1, outputs, seed + 100);
        const Eigen::MatrixXd uk = oracle::kron_power_rows(lagged_input_matrix(d.inputs, memory), order);
        const Eigen::VectorXd w = oracle::tt_to_dense(m.tt());
        const Eigen::MatrixXd wl = Eigen::Map<const Eigen::MatrixXd>(w.data(), outputs, w.size() / outputs);
        EXPECT_LT(rel_diff(predict(m, d), uk * wl.transpose()), 1e-10) << "seed " << seed;
    }
}

TEST(Predict, RejectsChannelMismatch) {
    const VolterraModel m = random_model(2, 2, 2, 5);
    EXPECT_THROW(predict(m, random_matrix(5, 2, 1)), StructuralError);
}

TEST(DesignMatrix, SingleCoreIsLaggedInputs) {
    const VolterraModel m = random_model(1, 3, 1, 6).with_tt(shift_canonical(random_tt(1, 4, 1, 6), 0), false);
    const TimeSeriesData d = noise_data(9, 1, 1, 7);
    EXPECT_LT(rel_diff(build_core_design_matrix(m, d, 0), lagged_input_matrix(d.inputs, 3)), 1e-15);
}

TEST(DesignMatrix, RankOneCollapsesToScaledInputs) {
    const VolterraModel m(shift_canonical(random_tt(2, 3, 1, 8), 0), 2, 1);
    const TimeSeriesData d = noise_data(9, 1, 1, 9);
    const Eigen::MatrixXd lag = lagged_input_matrix(d.inputs, 2);
    const Eigen::MatrixXd a = build_core_design_matrix(m, d, 0);
    const Eigen::VectorXd q = m.tt().core(1).entries();
    for (Index n = 0; n < 9; ++n) EXPECT_LT((a.row(n) - lag.row(n) * lag.row(n).dot(q)).norm(), 1e-12);
}

TEST(DesignMatrix, EqualsDenseFrameAndReproducesPredictions) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Index outputs = 1 + static_cast<Index>(seed % 2);
        const VolterraModel base = random_model(3, 2, 2, seed, 1, outputs);
        const TimeSeriesData d = noise_data(15, 1, outputs, seed + 50);
        for (std::size_t site = 0; site < 3; ++site) {
            const VolterraModel m = base.with_tt(shift_canonical(base.tt(), site), false);
            const Eigen::MatrixXd a = build_core_design_matrix(m, d, site);
            const Eigen::MatrixXd y = predict(m, d);
            const Eigen::VectorXd vy = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
            EXPECT_LT(rel_diff(a * m.tt().core(site).entries(), vy), 1e-12);

            // Dense frame: row n + N*l of U^{(x)3} Q restricted to output l.
            const Eigen::MatrixXd uk = oracle::kron_power_rows(lagged_input_matrix(d.inputs, 2), 3);
            const Eigen::MatrixXd q = oracle::frame_matrix(m.tt(), site);
            Eigen::MatrixXd dense(15 * outputs, q.cols());
            for (Index l = 0; l < outputs; ++l) {
                Eigen::MatrixXd ql(q.rows() / outputs, q.cols());
                for (Index k = 0; k < ql.rows(); ++k) ql.row(k) = q.row(l + outputs * k);
                dense.middleRows(15 * l, 15) = uk * ql;
            }
            EXPECT_LT(rel_diff(a, dense), 1e-10);
        }
        EXPECT_THROW(build_core_design_matrix(base.with_tt(shift_canonical(base.tt(), 0), false), d, 1),
                     StructuralError);
    }
}

TEST(AlsCoreUpdate, OptimalModelIsAFixedPoint) {
    const VolterraModel m(shift_canonical(random_tt(2, 3, 2, 30), 1), 2, 1);
    TimeSeriesData d = noise_data(40, 1, 1, 31);
    d.outputs = predict(m, d);
    const VolterraModel up = als_core_update(m, d, 1, AlsConfig{});
    EXPECT_LT(rel_diff(predict(up, d), d.outputs), 1e-10);
    EXPECT_TRUE(up.site_fresh());
}

TEST(AlsCoreUpdate, OrderOneGivesLinearRegression) {
    const VolterraModel m(shift_canonical(random_tt(1, 4, 1, 32), 0), 3, 1);
    const TimeSeriesData d = noise_data(30, 1, 1, 33);
    const VolterraModel up = als_core_update(m, d, 0, AlsConfig{});
    const Eigen::MatrixXd x = lagged_input_matrix(d.inputs, 3);
    const Eigen::VectorXd normal = (x.transpose() * x).ldlt().solve(x.transpose() * d.outputs);
    EXPECT_LT(rel_diff(up.tt().core(0).entries(), normal), 1e-10);
}

TEST(AlsCoreUpdate, MatchesFrameRestrictedDenseLs) {
    const VolterraModel m(shift_canonical(random_tt(2, 3, 2, 34), 0), 2, 1);
    const TimeSeriesData d = noise_data(50, 1, 1, 35);
    const VolterraModel up = als_core_update(m, d, 0, AlsConfig{});
    const Eigen::MatrixXd a =
        oracle::kron_power_rows(lagged_input_matrix(d.inputs, 2), 2) * oracle::frame_matrix(m.tt(), 0);
    const Eigen::VectorXd x = oracle::dense_ls(a, d.outputs.col(0));
    EXPECT_NEAR(training_residual(up, d), (d.outputs.col(0) - a * x).norm(), 1e-9);
    EXPECT_LE(training_residual(up, d), training_residual(m, d) + 1e-12);
}

TEST(AlsCoreUpdate, RidgeShrinksTheCore) {
    const VolterraModel m(shift_canonical(random_tt(1, 4, 1, 36), 0), 3, 1);
    const TimeSeriesData d = noise_data(30, 1, 1, 37);
    const double plain = als_core_update(m, d, 0, AlsConfig{}).tt().core(0).entries().norm();
    AlsConfig ridge;
    ridge.ridge = 10.0;
    EXPECT_LT(als_core_update(m, d, 0, ridge).tt().core(0).entries().norm(), plain);
}

TEST(AlsRun, ZeroUpdatesLeaveModelUnchanged) {
    const VolterraModel m(shift_canonical(random_tt(3, 3, 2, 40), 2), 2, 1);
    const AlsRun run = als_run(m, noise_data(20, 1, 1, 41), 0, AlsConfig{});
    EXPECT_TRUE(run.residual_history.empty());
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(run.model.tt().core(k).entries(), m.tt().core(k).entries());
}

TEST(AlsRun, HistoryIsMonotone) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const VolterraModel m = random_init(3, 2, 3, seed);
        const AlsRun run = als_run(m, noise_data(60, 1, 1, seed + 9), 12, AlsConfig{});
        ASSERT_EQ(run.residual_history.size(), 12u);
        for (std::size_t k = 1; k < run.residual_history.size(); ++k) {
            EXPECT_LE(run.residual_history[k], run.residual_history[k - 1] + 1e-12);
        }
    }
}

TEST(AlsRun, ZigZagVisitsCoresFromTheLastOne) {
    // With a stale site on the last core the sequence is D-1, D-2, ..., 0, 1, ...
    VolterraModel m = random_init(2, 2, 3, 3);
    const TimeSeriesData d = noise_data(30, 1, 1, 4);
    std::vector<std::size_t> sites;
    for (int k = 0; k < 6; ++k) {
        m = als_run(m, d, 1, AlsConfig{}).model;
        sites.push_back(m.site());
    }
    EXPECT_EQ(sites, (std::vector<std::size_t>{2, 1, 0, 1, 2, 1}));
}

TEST(AlsRun, FullRankConvergesToDenseGlobalLs) {
    // D = 2 with R = I: the frame of the second core is square and orthogonal.
    const VolterraModel m = random_init(2, 3, 2, 5);
    const TimeSeriesData d = noise_data(40, 1, 1, 6);
    const AlsRun run = als_run(m, d, 3, AlsConfig{});
    const Eigen::MatrixXd uk = oracle::kron_power_rows(lagged_input_matrix(d.inputs, 2), 2);
    const Eigen::VectorXd r = d.outputs.col(0) - uk * oracle::dense_ls(uk, d.outputs.col(0));
    EXPECT_NEAR(run.residual_history.back(), r.norm(), 1e-8);
}
