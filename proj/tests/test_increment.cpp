#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "test_util.hpp"
#include "vtn/errors.hpp"
#include "vtn/increment.hpp"
#include "vtn/metrics.hpp"
#include "vtn/selection.hpp"

using namespace vtn;
using vtn::testing::random_matrix;
using vtn::testing::rel_diff;

namespace {

TimeSeriesData noise_data(Index n, std::uint64_t seed) {
    return TimeSeriesData{random_matrix(n, 1, seed), random_matrix(n, 1, seed + 1)};
}

// Trained so the site core is the LS optimum of its frame.
VolterraModel trained(Index order, Index memory, Index rank, const TimeSeriesData& d, std::size_t updates = 1) {
    return als_run(random_init(memory, rank, order, 99), d, updates, AlsConfig{}).model;
}

}  // namespace

TEST(QzCore, FirstSliceIsIdentity) {
    const Core3 q1 = qz_core(1, 4);
    EXPECT_EQ(q1.entries(), Eigen::Vector4d(1, 0, 0, 0));
    const Core3 q = qz_core(2, 3);
    EXPECT_EQ(q.slice(0), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_EQ(q.slice(1), Eigen::MatrixXd::Zero(2, 2));
    EXPECT_EQ(q.slice(2), Eigen::MatrixXd::Zero(2, 2));
}

TEST(InsertQzCore, PreservesPredictionsAndDenseVector) {
    const TimeSeriesData d = noise_data(30, 1);
    const VolterraModel m = trained(1, 1, 1, d);
    const Insertion ins = insert_qz_core(m);
    EXPECT_EQ(ins.model.order(), 2);
    EXPECT_EQ(ins.position, 0u);
    EXPECT_LT(rel_diff(predict(ins.model, d), predict(m, d)), 1e-12);
    // D = 1 -> 2 with I = 2: inserted index fastest, so w_new = [w0, 0, w1, 0].
    const Eigen::VectorXd w = reconstruct(m.tt());
    const Eigen::VectorXd w2 = reconstruct(ins.model.tt());
    EXPECT_EQ(w2, Eigen::Vector4d(w(0), 0, w(1), 0));
    const oracle::DenseConstraints dc = oracle::oracle_constraints_order(1, 2, 1);
    EXPECT_LT(rel_diff(w2, dc.z * w), 1e-15);
}

TEST(InsertQzCore, BothSidesArePermutationEquivalent) {
    const TimeSeriesData d = noise_data(30, 2);
    const VolterraModel m = trained(2, 2, 3, d);
    const Insertion left = insert_qz_core(m, InsertSide::left);
    const Insertion right = insert_qz_core(m, InsertSide::right);
    EXPECT_LT(rel_diff(predict(left.model, d), predict(right.model, d)), 1e-12);
    const Eigen::VectorXd wl = reconstruct(left.model.tt());
    const Eigen::VectorXd wr = reconstruct(right.model.tt());
    EXPECT_NE(wl, wr);
    Eigen::VectorXd sl = wl;
    Eigen::VectorXd sr = wr;
    std::sort(sl.data(), sl.data() + sl.size());
    std::sort(sr.data(), sr.data() + sr.size());
    EXPECT_LT((sl - sr).norm(), 1e-12 * sl.norm());
}

TEST(CanonicalizeInsertion, SiteMovesAndConstraintsHold) {
    const TimeSeriesData d = noise_data(40, 3);
    const VolterraModel m = trained(2, 2, 3, d);
    const Insertion ins = insert_qz_core(m);
    const VolterraModel lse = canonicalize_insertion(ins);
    EXPECT_EQ(lse.site(), ins.position);
    EXPECT_LT(canonical_form_error(lse.tt(), ins.position), 1e-10);
    EXPECT_LT(rel_diff(predict(lse, d), predict(m, d)), 1e-12);
    const Core3& c = lse.tt().core(ins.position);
    const TtConstraints tc = build_constraints_tt(c.left_rank(), c.mode_size());
    EXPECT_EQ((tc.c * c.entries()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(CanonicalizeInsertion, RankOneSiteCoreIsScaledFirstBasisVector) {
    const TimeSeriesData d = noise_data(40, 4);
    const VolterraModel m = trained(1, 2, 1, d);
    const VolterraModel lse = canonicalize_insertion(insert_qz_core(m));
    const Eigen::VectorXd c = lse.tt().core(0).entries();
    EXPECT_NEAR(std::abs(c(0)), reconstruct(m.tt()).norm(), 1e-12);
    EXPECT_EQ(c.tail(2).norm(), 0.0);
}

TEST(IncreaseOrder, DecomposesPredictionsAndReducesResidual) {
    const TimeSeriesData d = noise_data(60, 5);
    const VolterraModel m = trained(2, 2, 2, d, 4);
    const IncreaseOutcome out = increase_order(m, d, AlsConfig{});
    EXPECT_EQ(out.kind, IncreaseKind::order);
    EXPECT_EQ(out.model_after.order(), 3);
    EXPECT_TRUE(out.model_after.site_fresh());
    EXPECT_LT(rel_diff(out.y_base + out.y_delta, predict(out.model_after, d)), 1e-10);
    EXPECT_LT(rel_diff(out.y_base, predict(m, d)), 1e-12);
    const double dot = out.y_delta.col(0).dot(out.y_base.col(0));
    EXPECT_LE(std::abs(dot), 1e-8 * out.y_delta.norm() * out.y_base.norm());
    EXPECT_LE(training_residual(out.model_after, d), training_residual(m, d) + 1e-12);
    EXPECT_NEAR(out.residual_vaf, vaf(d.outputs, out.y_base + out.y_delta) - vaf(d.outputs, out.y_base), 1e-12);
    // Pythagoras.
    const double before = (d.outputs - out.y_base).squaredNorm();
    const double after = (d.outputs - out.y_base - out.y_delta).squaredNorm();
    EXPECT_NEAR(before, after + out.y_delta.squaredNorm(), 1e-8 * before);
}

TEST(IncreaseOrder, VafAdditivityWithConstantFeature) {
    // Full frame (R = I), so the constant feature is inside the residual model's range.
    const TimeSeriesData d = noise_data(60, 6);
    const VolterraModel m = trained(2, 2, 3, d);
    const IncreaseOutcome out = increase_order(m, d, AlsConfig{});
    const auto var = [](const Eigen::MatrixXd& v) { return (v.array() - v.mean()).square().mean(); };
    EXPECT_NEAR(var(out.y_delta) / var(d.outputs), out.residual_vaf, 1e-6);
}

TEST(IncreaseOrder, ExactModelGivesZeroIncrement) {
    TimeSeriesData d = noise_data(60, 7);
    const VolterraModel truth = random_init(2, 1, 1, 8);
    d.outputs = predict(truth, d);
    const VolterraModel m = trained(1, 2, 1, d);
    const IncreaseOutcome out = increase_order(m, d, AlsConfig{});
    EXPECT_LT(out.y_delta.norm(), 1e-10 * d.outputs.norm());
    EXPECT_NEAR(out.residual_vaf, 0.0, 1e-12);
}

TEST(IncreaseOrder, SmallInstanceMatchesDenseResidualLs) {
    const TimeSeriesData d = noise_data(30, 9);
    const VolterraModel m = trained(1, 1, 1, d);
    const IncreaseOutcome out = increase_order(m, d, AlsConfig{});
    const Eigen::MatrixXd lag = lagged_input_matrix(d.inputs, 1);
    const Eigen::MatrixXd u2 = oracle::kron_power_rows(lag, 2);
    const Eigen::VectorXd r = d.outputs.col(0) - out.y_base.col(0);
    // The residual model lives in the frame of the inserted core.
    const VolterraModel lse = canonicalize_insertion(insert_qz_core(m));
    const Eigen::MatrixXd a = u2 * oracle::frame_matrix(lse.tt(), 0);
    EXPECT_LT(rel_diff(out.y_delta.col(0), a * oracle::dense_ls(a, r)), 1e-8);
}

TEST(PadMemory, AppendsZeroSlices) {
    const TimeSeriesData d = noise_data(20, 10);
    const VolterraModel m = trained(1, 2, 1, d);
    const VolterraModel p = pad_memory(m, 1);
    EXPECT_EQ(p.memory(), 3);
    const Eigen::VectorXd w = m.tt().core(0).entries();
    EXPECT_EQ(p.tt().core(0).entries(), Eigen::Vector4d(w(0), w(1), w(2), 0));
    EXPECT_LT(rel_diff(predict(p, d), predict(m, d)), 1e-12);
    EXPECT_THROW(pad_memory(m, -1), StructuralError);
}

TEST(IncreaseMemory, ZeroDeltaLeavesModelUnchanged) {
    const TimeSeriesData d = noise_data(20, 11);
    const VolterraModel m = trained(2, 2, 2, d);
    const IncreaseOutcome out = increase_memory(m, d, 0, AlsConfig{});
    EXPECT_EQ(out.model_after.memory(), 2);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(out.model_after.tt().core(k).entries(), m.tt().core(k).entries());
    EXPECT_EQ(out.y_delta.norm(), 0.0);
}

TEST(IncreaseMemory, RefitsAllCoresAndDecomposesPredictions) {
    const TimeSeriesData d = noise_data(60, 12);
    const VolterraModel m = trained(3, 2, 2, d, 5);
    const IncreaseOutcome out = increase_memory(m, d, 2, AlsConfig{});
    EXPECT_EQ(out.kind, IncreaseKind::memory);
    EXPECT_EQ(out.model_after.memory(), 4);
    EXPECT_EQ(out.model_after.mode_size(), 5);
    EXPECT_LT(rel_diff(out.y_base, predict(m, d)), 1e-12);
    EXPECT_LT(rel_diff(out.y_base + out.y_delta, predict(out.model_after, d)), 1e-10);
    EXPECT_LE(training_residual(out.model_after, d), training_residual(m, d) + 1e-12);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NE(out.model_after.tt().core(k).entries().tail(2).norm(), 0.0) << "core " << k << " not refit";
    }
}

TEST(BuildConstraintsTt, RankOneIndicatorAndBasis) {
    const TtConstraints tc = build_constraints_tt(1, 4);
    EXPECT_EQ(tc.indicator, Eigen::RowVector4d(0, 1, 1, 1));
    EXPECT_EQ(tc.z, Eigen::MatrixXd(Eigen::Vector4d(1, 0, 0, 0)));
    EXPECT_EQ(tc.c.rows(), 3);
    EXPECT_EQ(tc.c.colwise().sum(), tc.indicator);
}

TEST(BuildConstraintsTt, KroneckerPatternForRankTwo) {
    const TtConstraints tc = build_constraints_tt(2, 2);
    EXPECT_EQ(tc.c.rows(), 4);
    EXPECT_EQ(tc.c.cols(), 8);
    EXPECT_EQ((tc.c * tc.z).norm(), 0.0);
    // I_R (x) e_1 (x) I_R with vec index r + R*(i + I*s).
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(8, 4);
    z(0, 0) = z(1, 1) = z(4, 2) = z(5, 3) = 1.0;
    EXPECT_EQ(tc.z, z);
    Eigen::RowVectorXd ind(8);
    ind << 0, 0, 1, 1, 0, 0, 1, 1;
    EXPECT_EQ(tc.indicator, ind);
}

TEST(BuildConstraintsTt, NullspaceBasisIsOrthonormalAndComplementary) {
    for (Index r = 1; r <= 3; ++r) {
        for (Index i = 2; i <= 4; ++i) {
            const TtConstraints tc = build_constraints_tt(r, i);
            EXPECT_EQ(tc.z.transpose() * tc.z, Eigen::MatrixXd::Identity(r * r, r * r));
            EXPECT_EQ((tc.c * tc.z).norm(), 0.0);
            EXPECT_EQ(tc.c.rows() + tc.z.cols(), r * i * r);
            // The inserted core lies in range(Z).
            const Core3 q = qz_core(r, i);
            EXPECT_EQ((tc.c * q.entries()).norm(), 0.0);
        }
    }
    EXPECT_THROW(build_constraints_tt(1, 1), StructuralError);
}
