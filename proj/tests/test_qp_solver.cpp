#include <gtest/gtest.h>

#include <limits>

#include "refcond/qp_oracle.hpp"
#include "refcond/qp_solver.hpp"
#include "test_support.hpp"

using namespace refcond;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DenseQp box_qp(Matrix h, Vector f, Vector lb, Vector ub) {
    DenseQp qp;
    const auto n = h.rows();
    qp.hessian = std::move(h);
    qp.linear = std::move(f);
    qp.lower = std::move(lb);
    qp.upper = std::move(ub);
    qp.ineq_matrix.resize(0, n);
    qp.ineq_rhs.resize(0);
    return qp;
}

DenseQp random_box(std::mt19937_64& rng, int n) {
    const Matrix m = test_support::gaussian(rng, n, n);
    std::uniform_real_distribution<double> u(0.0, 1.5);
    Vector lb(n), ub(n);
    for (int i = 0; i < n; ++i) {
        lb(i) = -u(rng);
        ub(i) = u(rng);
    }
    return box_qp(m * m.transpose() + 0.1 * Matrix::Identity(n, n), 2.0 * test_support::gaussian(rng, n), lb, ub);
}

} // namespace

TEST(QpSolve, UnconstrainedScalar) {
    const auto qp = box_qp(Matrix::Identity(1, 1), Vector::Constant(1, -2.0), Vector::Constant(1, -kInf),
                           Vector::Constant(1, kInf));
    const QpSolution s = solve(qp);
    EXPECT_EQ(s.status, QpStatus::optimal);
    EXPECT_NEAR(s.z(0), 2.0, 1e-14);
    EXPECT_TRUE(s.active_set.constraints.empty());
}

TEST(QpSolve, ClippedScalar) {
    const auto qp = box_qp(Matrix::Identity(1, 1), Vector::Constant(1, -2.0), Vector::Constant(1, -kInf),
                           Vector::Constant(1, 1.0));
    const QpSolution s = solve(qp);
    ASSERT_EQ(s.status, QpStatus::optimal);
    EXPECT_NEAR(s.z(0), 1.0, 1e-14);
    EXPECT_NEAR(s.upper_duals(0), 1.0, 1e-14);
    EXPECT_EQ(s.lower_duals(0), 0.0);
    ASSERT_EQ(s.active_set.constraints.size(), 1u);
    EXPECT_EQ(s.active_set.constraints[0], 1);  // upper bound of z_0
}

TEST(QpSolve, GeneralInequality) {
    // min (z1-1)^2 + (z2-1)^2 s.t. z1 + z2 <= 1  ->  (0.5, 0.5), multiplier 1
    DenseQp qp = box_qp(2.0 * Matrix::Identity(2, 2), Vector::Constant(2, -2.0), Vector::Constant(2, -kInf),
                        Vector::Constant(2, kInf));
    qp.ineq_matrix = Matrix::Ones(1, 2);
    qp.ineq_rhs = Vector::Ones(1);
    const QpSolution s = solve(qp);
    ASSERT_EQ(s.status, QpStatus::optimal);
    EXPECT_NEAR(s.z(0), 0.5, 1e-14);
    EXPECT_NEAR(s.z(1), 0.5, 1e-14);
    EXPECT_NEAR(s.ineq_duals(0), 1.0, 1e-14);
    EXPECT_LE(s.kkt_residual, 1e-12);
}

TEST(QpSolve, RandomBoxQpsMatchEnumeration) {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 50; ++t) {
        const DenseQp qp = random_box(rng, 6);
        const QpSolution s = solve(qp);
        ASSERT_EQ(s.status, QpStatus::optimal);
        const auto oracle = enumerate_box_qp(qp);
        ASSERT_TRUE(oracle.has_value());
        EXPECT_LT((s.z - *oracle).cwiseAbs().maxCoeff(), 1e-7) << "instance " << t;
        EXPECT_LE(s.kkt_residual, 1e-8);
    }
}

TEST(QpSolve, ObjectiveNoWorseThanRandomFeasiblePoints) {
    std::mt19937_64 rng(9);
    const DenseQp qp = random_box(rng, 5);
    const QpSolution s = solve(qp);
    ASSERT_EQ(s.status, QpStatus::optimal);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        Vector z(5);
        for (int i = 0; i < 5; ++i) z(i) = qp.lower(i) + u(rng) * (qp.upper(i) - qp.lower(i));
        EXPECT_LE(s.objective, objective(qp, z) + 1e-12);
    }
}

TEST(QpSolve, WarmStartAgreesWithColdStart) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 30; ++t) {
        const DenseQp qp = random_box(rng, 6);
        const QpSolution cold = solve(qp);
        QpSettings warm;
        warm.warm_start = cold.active_set;
        const QpSolution hot = solve(qp, warm);
        ASSERT_EQ(hot.status, QpStatus::optimal);
        EXPECT_LT((hot.z - cold.z).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE(hot.iterations, cold.iterations);

        // A stale or contradictory guess still converges to the same point.
        QpSettings stale;
        stale.warm_start = ActiveSet{{0, 7, 2, 9}};
        const QpSolution other = solve(qp, stale);
        ASSERT_EQ(other.status, QpStatus::optimal);
        EXPECT_LT((other.z - cold.z).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(QpSolve, InfeasibleWithCertificate) {
    // z <= -1 and -z <= -1 (z >= 1)
    DenseQp qp = box_qp(Matrix::Identity(1, 1), Vector::Zero(1), Vector::Constant(1, -kInf), Vector::Constant(1, kInf));
    qp.ineq_matrix.resize(2, 1);
    qp.ineq_matrix << 1.0, -1.0;
    qp.ineq_rhs.resize(2);
    qp.ineq_rhs << -1.0, -1.0;
    const QpSolution s = solve(qp);
    ASSERT_EQ(s.status, QpStatus::infeasible);
    const Vector& y = s.infeasibility_certificate;
    ASSERT_EQ(y.size(), 4);
    EXPECT_GE(y.minCoeff(), 0.0);
    const Vector y_rows = y.tail(2);
    EXPECT_NEAR((qp.ineq_matrix.transpose() * y_rows)(0), 0.0, 1e-12);
    EXPECT_LT(qp.ineq_rhs.dot(y_rows), 0.0);
}

TEST(QpSolve, ZeroRowWithNegativeRhsIsInfeasible) {
    DenseQp qp = box_qp(Matrix::Identity(2, 2), Vector::Zero(2), Vector::Constant(2, -1), Vector::Constant(2, 1));
    qp.ineq_matrix = Matrix::Zero(1, 2);
    qp.ineq_rhs = Vector::Constant(1, -0.5);
    EXPECT_EQ(solve(qp).status, QpStatus::infeasible);
}

TEST(QpSolve, InputValidation) {
    auto qp = box_qp(Matrix::Identity(2, 2), Vector::Zero(2), Vector::Constant(2, 1.0), Vector::Constant(2, -1.0));
    EXPECT_THROW(solve(qp), DimensionError);

    Matrix h(2, 2);
    h << 1, 2, 2, 1;  // indefinite
    EXPECT_THROW(solve(box_qp(h, Vector::Zero(2), Vector::Constant(2, -1), Vector::Constant(2, 1))), NumericalError);

    Matrix asym(2, 2);
    asym << 2, 1, 0, 2;
    EXPECT_THROW(solve(box_qp(asym, Vector::Zero(2), Vector::Constant(2, -1), Vector::Constant(2, 1))), DimensionError);

    EXPECT_THROW(solve(box_qp(Matrix::Identity(2, 2), Vector::Zero(3), Vector::Constant(2, -1), Vector::Constant(2, 1))),
                 DimensionError);
}

TEST(QpSolve, IterationLimitReported) {
    std::mt19937_64 rng(2);
    DenseQp qp = random_box(rng, 8);
    qp.linear *= 50.0;  // push many bounds active
    QpSettings s;
    s.max_iterations = 1;
    const QpSolution sol = solve(qp, s);
    EXPECT_EQ(sol.status, QpStatus::max_iterations);
}

TEST(QpOracle, AgreesOnSimpleClip) {
    const auto qp = box_qp(Matrix::Identity(2, 2), Vector::Constant(2, -3.0), Vector::Constant(2, -1), Vector::Constant(2, 1));
    const auto z = enumerate_box_qp(qp);
    ASSERT_TRUE(z.has_value());
    EXPECT_NEAR((*z)(0), 1.0, 1e-14);
    EXPECT_NEAR((*z)(1), 1.0, 1e-14);
}

TEST(QpStatusNames, ToString) {
    EXPECT_EQ(to_string(QpStatus::optimal), "optimal");
    EXPECT_EQ(to_string(QpStatus::infeasible), "infeasible");
}
