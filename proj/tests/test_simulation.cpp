#include <gtest/gtest.h>

#include <cmath>

#include "refcond/simulation.hpp"
#include "refcond/studies.hpp"
#include "test_support.hpp"

using namespace refcond;

namespace {

SimConfig di_config(ControllerKind kind, ReferenceSignal signal, int horizon = 50, double t_final = 20.0) {
    return SimConfig{
        .sys = double_integrator(0.1),
        .weights = unit_weights(),
        .horizon = horizon,
        .t_final = t_final,
        .x0 = Vector(),
        .kind = std::move(kind),
        .signal = std::move(signal),
        .input_bounds = InputBounds::symmetric(1, 1.0),
        .state_constraints = std::nullopt,
    };
}

ReferenceSignal unit_step() { return ReferenceSignal::step(5.0, Vector::Zero(1), Vector::Ones(1)); }

} // namespace

TEST(Simulate, ZeroReferenceStaysAtRest) {
    const SimResult r = simulate_closed_loop(di_config(ControllerKind::full_preview(), ReferenceSignal::constant(Vector::Zero(1)), 20, 5.0));
    EXPECT_EQ(r.ise, 0.0);
    for (const auto& x : r.states) EXPECT_TRUE(x.isZero(0.0));
    for (const auto& u : r.controls) EXPECT_TRUE(u.isZero(0.0));
}

TEST(Simulate, LengthsConsistent) {
    const SimResult r = simulate_closed_loop(di_config(ControllerKind::no_preview(), unit_step(), 10, 3.0));
    EXPECT_EQ(r.steps(), 30);
    EXPECT_EQ(r.states.size(), 31u);
    EXPECT_EQ(r.controls.size(), 31u);
    EXPECT_EQ(r.references.size(), 31u);
    EXPECT_DOUBLE_EQ(r.times.back(), 3.0);
}

TEST(Simulate, RejectsNonIntegralDuration) {
    EXPECT_THROW(simulate_closed_loop(di_config(ControllerKind::no_preview(), unit_step(), 10, 3.05)), DimensionError);
    EXPECT_THROW(simulate_closed_loop(di_config(ControllerKind::no_preview(), unit_step(), 10, 0.0)), DimensionError);
}

TEST(Simulate, StepStudyNoPreview) {
    const SimResult r = simulate_closed_loop(di_config(ControllerKind::no_preview(), unit_step()));
    EXPECT_NEAR(r.ise, 1.114, 0.02 * 1.114);
}

TEST(Simulate, StepStudyConditionedMatchesPreview) {
    const SimResult cond = simulate_closed_loop(di_config(ControllerKind::reference_condensation(1e6), unit_step()));
    const SimResult full = simulate_closed_loop(di_config(ControllerKind::full_preview(), unit_step()));
    EXPECT_NEAR(cond.ise, 0.259, 0.02 * 0.259);
    EXPECT_LE(std::abs(cond.ise - full.ise), 1e-3);
    for (std::size_t k = 0; k < cond.states.size(); ++k) EXPECT_LT((cond.states[k] - full.states[k]).norm(), 1e-6);
}

TEST(Simulate, PreviewAnticipatesStep) {
    const SimResult r = simulate_closed_loop(di_config(ControllerKind::full_preview(), unit_step()));
    // position already moving before t = 5
    EXPECT_GT(r.states[49](0), 0.01);
    const SimResult none = simulate_closed_loop(di_config(ControllerKind::no_preview(), unit_step()));
    EXPECT_EQ(none.states[49](0), 0.0);
}

TEST(Simulate, ConstantReferenceSameTrajectoryForAllKinds) {
    const ReferenceSignal c = ReferenceSignal::constant(Vector::Constant(1, 0.6));
    const SimResult base = simulate_closed_loop(di_config(ControllerKind::full_preview(), c, 20, 8.0));
    for (const auto& kind : {ControllerKind::no_preview(), ControllerKind::average_reference(),
                             ControllerKind::reference_condensation(), ControllerKind::reference_condensation(1e6)}) {
        const SimResult r = simulate_closed_loop(di_config(kind, c, 20, 8.0));
        for (std::size_t k = 0; k < r.states.size(); ++k) EXPECT_LT((r.states[k] - base.states[k]).norm(), 1e-9);
    }
}

TEST(Simulate, ObserverSeesEveryStep) {
    int calls = 0;
    simulate_closed_loop(di_config(ControllerKind::no_preview(), unit_step(), 10, 2.0),
                         [&](int k, const Vector&, const PreviewInput& p, const Vector&) {
                             EXPECT_EQ(k, calls);
                             EXPECT_EQ(p.window.size(), 10);
                             ++calls;
                         });
    EXPECT_EQ(calls, 20);
}

TEST(Simulate, InfeasibilityCarriesStep) {
    SimConfig cfg = di_config(ControllerKind::full_preview(), ReferenceSignal::constant(Vector::Constant(1, 5.0)), 5, 5.0);
    Matrix p(1, 2);
    p << 1, 0;
    cfg.state_constraints = StatePolyhedron{p, Vector::Constant(1, -1.0)};
    try {
        simulate_closed_loop(cfg);
        FAIL() << "expected infeasibility";
    } catch (const QpInfeasibleError& e) {
        EXPECT_EQ(e.step(), 0);
    }
}

TEST(Ise, ConstantUnitErrorOverFifteenSeconds) {
    const Matrix c = Matrix::Identity(1, 1);
    const std::vector<Vector> states(150, Vector::Ones(1));
    const std::vector<Vector> refs(150, Vector::Zero(1));
    EXPECT_NEAR(ise(c, states, refs, 0.1), 15.0, 1e-12);
    EXPECT_EQ(ise(c, states, states, 0.1), 0.0);
}

TEST(Ise, RecomputedFromExportedFile) {
    test_support::TempDir dir("ise");
    const SimResult r = simulate_closed_loop(di_config(ControllerKind::average_reference(), unit_step()));
    const auto path = dir.path() / "traj.txt";
    export_trajectories(r, path);
    const TrajectoryTable t = read_trajectories(path);
    ASSERT_EQ(t.columns, (std::vector<std::string>{"t", "x1", "x2", "u1", "r1"}));
    ASSERT_EQ(t.rows.size(), 201u);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < t.rows.size(); ++k) acc += 0.1 * std::pow(t.rows[k][1] - t.rows[k][4], 2);
    EXPECT_NEAR(acc, r.ise, 1e-12);
}

TEST(ExportTrajectories, ZeroTrajectoryRoundTripsExactly) {
    test_support::TempDir dir("zero");
    const SimResult r =
        simulate_closed_loop(di_config(ControllerKind::no_preview(), ReferenceSignal::constant(Vector::Zero(1)), 5, 1.0));
    export_trajectories(r, dir.path() / "z.txt");
    const TrajectoryTable t = read_trajectories(dir.path() / "z.txt");
    ASSERT_EQ(t.rows.size(), 11u);
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        EXPECT_EQ(t.rows[k][0], r.times[k]);
        for (std::size_t j = 1; j < t.rows[k].size(); ++j) EXPECT_EQ(t.rows[k][j], 0.0);
    }
}

TEST(ExportTrajectories, BitExactForNonzeroData) {
    test_support::TempDir dir("exact");
    const SimResult r = simulate_closed_loop(di_config(ControllerKind::full_preview(), ReferenceSignal::sinusoid(Vector::Ones(1), 0.5), 10, 2.0));
    export_trajectories(r, dir.path() / "s.txt");
    const TrajectoryTable t = read_trajectories(dir.path() / "s.txt");
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        EXPECT_EQ(t.rows[k][1], r.states[k](0));
        EXPECT_EQ(t.rows[k][3], r.controls[k](0));
    }
}

TEST(ExportTrajectories, UnwritablePathThrows) {
    const SimResult r = simulate_closed_loop(di_config(ControllerKind::no_preview(), unit_step(), 5, 1.0));
    EXPECT_ANY_THROW(export_trajectories(r, "/nonexistent_dir_refcond/x.txt"));
}
