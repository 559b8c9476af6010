#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "refcond/lq_batch.hpp"
#include "refcond/studies.hpp"
#include "test_support.hpp"

using namespace refcond;

namespace {

LtiSystem scalar_system() {
    return LtiSystem(Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), 1.0);
}

TrackingWeights scalar_weights(double q = 1.0) { return TrackingWeights(Matrix::Constant(1, 1, q), Matrix::Ones(1, 1)); }

} // namespace

TEST(LtiSystem, RejectsMismatchedShapes) {
    EXPECT_THROW(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(3, 1), Matrix::Ones(1, 2), 0.1), DimensionError);
    EXPECT_THROW(LtiSystem(Matrix::Ones(2, 3), Matrix::Ones(2, 1), Matrix::Ones(1, 2), 0.1), DimensionError);
    EXPECT_THROW(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 3), 0.1), DimensionError);
    EXPECT_THROW(LtiSystem(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 2), 0.0), DimensionError);
}

TEST(LtiSystem, ZeroOrderHoldOfDoubleIntegrator) {
    Matrix ac(2, 2);
    ac << 0, 1, 0, 0;
    Matrix bc(2, 1);
    bc << 0, 1;
    const LtiSystem sys = LtiSystem::from_continuous(ac, bc, Matrix::Identity(1, 2), 0.1);
    const LtiSystem ref = double_integrator(0.1);
    EXPECT_LT((sys.a() - ref.a()).norm(), 1e-14);
    EXPECT_LT((sys.b() - ref.b()).norm(), 1e-14);
}

TEST(TrackingWeights, Validation) {
    EXPECT_THROW(TrackingWeights(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1)), NumericalError);
    EXPECT_THROW(TrackingWeights(Matrix::Ones(1, 1), Matrix::Zero(1, 1)), NumericalError);
    EXPECT_THROW(TrackingWeights(Matrix::Ones(2, 1), Matrix::Ones(1, 1)), DimensionError);
    Matrix asym(2, 2);
    asym << 1, 0.5, 0, 1;
    EXPECT_THROW(TrackingWeights(asym, Matrix::Ones(1, 1)), DimensionError);
    EXPECT_NO_THROW(TrackingWeights(Matrix::Zero(1, 1), Matrix::Ones(1, 1)));
}

TEST(BatchOperators, ScalarHessian) {
    const BatchOperators ops = build_batch_operators(scalar_system(), scalar_weights(), 1);
    ASSERT_EQ(ops.hessian.rows(), 1);
    EXPECT_DOUBLE_EQ(ops.hessian(0, 0), 2.0);
}

TEST(BatchOperators, DoubleIntegratorTwoStepInputMap) {
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 2);
    // x1 = B u0, x2 = A B u0 + B u1
    Matrix expected(4, 2);
    expected << 0.005, 0.0, 0.1, 0.0, 0.015, 0.005, 0.1, 0.1;
    EXPECT_LT((ops.b_bar - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BatchOperators, HessianSpectrumShiftedByR) {
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 50);
    EXPECT_LT((ops.hessian - ops.hessian.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(ops.hessian);
    EXPECT_GE(eig.eigenvalues().minCoeff(), 1.0 - 1e-10);
}

TEST(BatchOperators, RejectsBadHorizon) {
    EXPECT_THROW(build_batch_operators(scalar_system(), scalar_weights(), 0), DimensionError);
    EXPECT_THROW(build_batch_operators(double_integrator(0.1), TrackingWeights(Matrix::Identity(2, 2), Matrix::Ones(1, 1)), 3),
                 DimensionError);
}

TEST(TrackingGains, ScalarExample) {
    const TrackingGains g = tracking_gains(build_batch_operators(scalar_system(), scalar_weights(), 1));
    EXPECT_NEAR(g.fx(0, 0), -0.5, 1e-15);
    EXPECT_NEAR(g.fr(0, 0), 0.5, 1e-15);
    EXPECT_TRUE(open_loop_sequence(g, Vector::Ones(1), Vector::Ones(1)).isZero(1e-15));
}

TEST(TrackingGains, ZeroOutputWeightGivesZeroGains) {
    const TrackingGains g =
        tracking_gains(build_batch_operators(double_integrator(0.1), TrackingWeights(Matrix::Zero(1, 1), Matrix::Ones(1, 1)), 10));
    EXPECT_TRUE(g.fx.isZero(0.0));
    EXPECT_TRUE(g.fr.isZero(0.0));
}

TEST(TrackingGains, FirstRowShape) {
    const TrackingGains g = tracking_gains(build_batch_operators(double_integrator(0.1), unit_weights(), 50));
    const Vector row = g.fr.row(0).transpose();
    Eigen::Index peak = 0;
    row.maxCoeff(&peak);
    EXPECT_GE(peak, 4);
    EXPECT_LE(peak, 16);
    EXPECT_GT(row(peak), 0.0);
}

TEST(OpenLoopSequence, ZeroDataZeroInput) {
    const TrackingGains g = tracking_gains(build_batch_operators(double_integrator(0.1), unit_weights(), 10));
    EXPECT_TRUE(open_loop_sequence(g, Vector::Zero(2), Vector::Zero(10)).isZero(0.0));
    EXPECT_THROW(open_loop_sequence(g, Vector::Zero(3), Vector::Zero(10)), DimensionError);
    EXPECT_THROW(open_loop_sequence(g, Vector::Zero(2), Vector::Zero(9)), DimensionError);
}

TEST(OpenLoopSequence, MatchesLeastSquaresOracle) {
    std::mt19937_64 rng(7);
    const LtiSystem sys = double_integrator(0.1);
    const TrackingGains g = tracking_gains(build_batch_operators(sys, unit_weights(), 10));
    for (int t = 0; t < 20; ++t) {
        const Vector x0 = test_support::gaussian(rng, 2);
        const Vector r = test_support::gaussian(rng, 10);
        const Vector oracle = test_support::tracking_ls_oracle(sys, unit_weights(), 10, x0, r);
        EXPECT_LT((open_loop_sequence(g, x0, r) - oracle).norm(), 1e-8);
    }
}

TEST(OpenLoopSequence, MatchesOracleMultivariable) {
    std::mt19937_64 rng(11);
    const LtiSystem sys(0.5 * test_support::gaussian(rng, 4, 4), test_support::gaussian(rng, 4, 2), test_support::gaussian(rng, 2, 4), 0.1);
    Matrix q(2, 2);
    q << 2.0, 0.3, 0.3, 1.0;
    const TrackingWeights w(q, 0.5 * Matrix::Identity(2, 2));
    const TrackingGains g = tracking_gains(build_batch_operators(sys, w, 7));
    const Vector x0 = test_support::gaussian(rng, 4);
    const Vector r = test_support::gaussian(rng, 14);
    EXPECT_LT((open_loop_sequence(g, x0, r) - test_support::tracking_ls_oracle(sys, w, 7, x0, r)).norm(), 1e-8);
}

TEST(Rollout, IdentityDynamicsHoldState) {
    const LtiSystem sys(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Identity(2, 2), 1.0);
    const Vector x0 = Vector::LinSpaced(2, 1.0, 2.0);
    const Vector xs = rollout(sys, x0, Vector::Zero(5));
    for (int k = 0; k < 5; ++k) EXPECT_EQ(xs.segment(2 * k, 2), x0);
}

TEST(Rollout, DoubleIntegratorQuadraticPositions) {
    const Vector xs = rollout(double_integrator(0.1), Vector::Zero(2), Vector::Ones(30));
    for (int k = 1; k <= 30; ++k) EXPECT_NEAR(xs(2 * (k - 1)), 0.005 * k * k, 1e-12) << "k=" << k;
}

TEST(Rollout, AgreesWithBatchOperators) {
    std::mt19937_64 rng(3);
    const LtiSystem sys = double_integrator(0.1);
    const BatchOperators ops = build_batch_operators(sys, unit_weights(), 50);
    const Vector x0 = test_support::gaussian(rng, 2);
    const Vector u = test_support::gaussian(rng, 50);
    const Vector diff = rollout(sys, x0, u) - (ops.a_bar * x0 + ops.b_bar * u);
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BatchCost, GradientMatchesFiniteDifference) {
    std::mt19937_64 rng(5);
    const BatchOperators ops = build_batch_operators(double_integrator(0.1), unit_weights(), 6);
    const Vector x0 = test_support::gaussian(rng, 2);
    const Vector r = test_support::gaussian(rng, 6);
    const Vector u = test_support::gaussian(rng, 6);
    const Vector grad = batch_cost_gradient(ops, x0, r, u);
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
        Vector up = u, dn = u;
        up(i) += h;
        dn(i) -= h;
        const double fd = (batch_cost(ops, x0, r, up) - batch_cost(ops, x0, r, dn)) / (2 * h);
        EXPECT_NEAR(grad(i), fd, 1e-6);
    }
}

TEST(StackedIdentity, Shape) {
    const Matrix i = stacked_identity(2, 3);
    ASSERT_EQ(i.rows(), 6);
    ASSERT_EQ(i.cols(), 2);
    EXPECT_EQ(i.block(4, 0, 2, 2), Matrix::Identity(2, 2));
}
