#include <gtest/gtest.h>

#include "refcond/mpc_qp.hpp"
#include "refcond/studies.hpp"
#include "test_support.hpp"

using namespace refcond;

TEST(MpcQp, ZeroDataZeroSolution) {
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 10);
    const DenseQp qp = build_mpc_qp(ops, Vector::Zero(2), Vector::Zero(10), InputBounds::unbounded(1));
    EXPECT_TRUE(qp.linear.isZero(0.0));
    EXPECT_TRUE(solve(qp).z.isZero(1e-15));
}

TEST(MpcQp, UnconstrainedMatchesOpenLoop) {
    std::mt19937_64 rng(31);
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 20);
    const TrackingGains g = tracking_gains(ops);
    for (int t = 0; t < 10; ++t) {
        const Vector x = test_support::gaussian(rng, 2);
        const Vector r = test_support::gaussian(rng, 20);
        const QpSolution s = solve(build_mpc_qp(ops, x, r, InputBounds::unbounded(1)));
        EXPECT_LT((s.z - open_loop_sequence(g, x, r)).norm(), 1e-9);
    }
}

TEST(MpcQp, LargeStepSaturatesLeadingInputs) {
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 50);
    const QpSolution s = solve(build_mpc_qp(ops, Vector::Zero(2), Vector::Constant(50, 20.0), InputBounds::symmetric(1, 1.0)));
    ASSERT_EQ(s.status, QpStatus::optimal);
    EXPECT_NEAR(s.z(0), 1.0, 1e-12);
    EXPECT_NEAR(s.z(1), 1.0, 1e-12);
    EXPECT_LE(s.z.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
}

TEST(MpcQp, StateRowsMappedThroughDynamics) {
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 5);
    Matrix p(1, 2);
    p << 0.0, 1.0;  // v_k <= 0.3
    const StatePolyhedron poly{p, Vector::Constant(1, 0.3)};
    Vector x(2);
    x << 0.0, 0.1;
    const DenseQp qp = build_mpc_qp(ops, x, Vector::Constant(5, 10.0), InputBounds::symmetric(1, 1.0), poly);
    ASSERT_EQ(qp.num_inequalities(), 5);
    const QpSolution s = solve(qp);
    ASSERT_EQ(s.status, QpStatus::optimal);
    const Vector xs = ops.a_bar * x + ops.b_bar * s.z;
    for (int k = 0; k < 5; ++k) EXPECT_LE(xs(2 * k + 1), 0.3 + 1e-9);
}

TEST(MpcQp, TrivialStateRowsDropped) {
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 4);
    const StatePolyhedron poly{Matrix::Zero(1, 2), Vector::Constant(1, 1.0)};
    EXPECT_EQ(build_mpc_qp(ops, Vector::Zero(2), Vector::Zero(4), InputBounds::unbounded(1), poly).num_inequalities(), 0);
}

TEST(MpcQp, DimensionChecks) {
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 4);
    EXPECT_THROW(build_mpc_qp(ops, Vector::Zero(3), Vector::Zero(4), InputBounds::unbounded(1)), DimensionError);
    EXPECT_THROW(build_mpc_qp(ops, Vector::Zero(2), Vector::Zero(5), InputBounds::unbounded(1)), DimensionError);
    EXPECT_THROW(build_mpc_qp(ops, Vector::Zero(2), Vector::Zero(4), InputBounds::unbounded(2)), DimensionError);
}
