#include "refcond/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "refcond/condensation.hpp"
#include "refcond/controllers.hpp"
#include "refcond/qp_oracle.hpp"
#include "refcond/reference.hpp"
#include "refcond/studies.hpp"

namespace refcond {

namespace {

struct Problem {
    std::string label;
    LtiSystem sys;
    TrackingWeights weights;
    int horizon;
};

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    Matrix gaussian(int rows, int cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal_(rng_);
        return m;
    }
    Vector gaussian(int n) { return gaussian(n, 1); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Matrix spd(int n, double shift) {
        const Matrix m = gaussian(n, n);
        return m * m.transpose() / n + shift * Matrix::Identity(n, n);
    }

    Problem problem(int nx, int nu, int nr, int horizon) {
        Matrix a = gaussian(nx, nx) / std::sqrt(static_cast<double>(nx));
        const double rad = spectral_radius(a);
        if (rad > 1.1) a *= 1.1 / rad;
        return Problem{"random(" + std::to_string(nx) + "," + std::to_string(nu) + "," + std::to_string(nr) +
                           ",N=" + std::to_string(horizon) + ")",
                       LtiSystem(a, gaussian(nx, nu), gaussian(nr, nx), 0.1),
                       TrackingWeights(spd(nr, 0.1), spd(nu, 0.5)), horizon};
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

class Check {
public:
    Check(std::string name, double tolerance) {
        result_.name = std::move(name);
        result_.tolerance = tolerance;
    }

    // `measure` is compared against the tolerance; larger is worse.
    void observe(double measure, const std::string& where) {
        if (!std::isfinite(measure)) measure = std::numeric_limits<double>::infinity();
        if (measure > result_.worst || cases_ == 0) {
            result_.worst = measure;
            where_ = where;
        }
        ++cases_;
    }

    PropertyCheck finish() {
        result_.passed = cases_ > 0 && result_.worst <= result_.tolerance;
        std::ostringstream os;
        os << cases_ << " cases";
        if (!where_.empty()) os << ", worst at " << where_;
        result_.detail = os.str();
        return result_;
    }

private:
    PropertyCheck result_;
    std::string where_;
    long cases_ = 0;
};

std::vector<Problem> test_problems(Sampler& sampler, int random_count) {
    std::vector<Problem> problems;
    for (int n : {1, 5, 30, 50, 100}) {
        problems.push_back({"double_integrator(N=" + std::to_string(n) + ")", double_integrator(0.1), unit_weights(), n});
    }
    for (int i = 0; i < random_count; ++i) {
        const int nx = sampler.integer(1, 5);
        const int nu = sampler.integer(1, 3);
        const int horizon = sampler.integer(1, 20);
        // Fr Ibar needs N nu >= nr to have full column rank.
        const int nr = sampler.integer(1, std::min({nx, 3, nu * horizon}));
        problems.push_back(sampler.problem(nx, nu, nr, horizon));
    }
    return problems;
}

std::vector<CondensationMap> maps_for(const TrackingGains& gains) {
    std::vector<CondensationMap> maps{unweighted_map(gains)};
    for (double rho : {1.0, 1e2, 1e6}) maps.push_back(weighted_map(gains, rho));
    return maps;
}

std::string map_label(const CondensationMap& map) {
    if (map.kind == CondensationKind::unweighted) return "S";
    std::ostringstream os;
    os << "S_W(rho=" << map.rho << ")";
    return os.str();
}

Matrix weight_matrix(const TrackingGains& gains, double rho) {
    Vector w = Vector::Ones(gains.horizon * gains.nu);
    w.head(gains.nu).setConstant(rho * rho);
    return w.asDiagonal();
}

DenseQp random_box_qp(Sampler& sampler, int n) {
    DenseQp qp;
    qp.hessian = sampler.spd(n, 0.1);
    qp.linear = 2.0 * sampler.gaussian(n);
    qp.lower.resize(n);
    qp.upper.resize(n);
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        qp.lower(i) = sampler.uniform(0.0, 1.0) < 0.1 ? -inf : -sampler.uniform(0.0, 1.5);
        qp.upper(i) = sampler.uniform(0.0, 1.0) < 0.1 ? inf : sampler.uniform(0.0, 1.5);
    }
    qp.ineq_matrix.resize(0, n);
    qp.ineq_rhs.resize(0);
    return qp;
}

// ---- individual properties ----

PropertyCheck check_gradient(const std::vector<Problem>& problems, Sampler& sampler) {
    Check check("lq_gradient_vanishes", 1e-8);
    for (const auto& p : problems) {
        const BatchOperators ops = build_batch_operators(p.sys, p.weights, p.horizon);
        const TrackingGains gains = tracking_gains(ops);
        const Vector x0 = sampler.gaussian(ops.nx);
        const Vector r = sampler.gaussian(ops.horizon * ops.nr);
        const Vector u = open_loop_sequence(gains, x0, r);
        const Vector g = batch_cost_gradient(ops, x0, r, u);
        check.observe(g.norm() / (1.0 + u.norm()), p.label);
    }
    return check.finish();
}

PropertyCheck check_perturbation(const std::vector<Problem>& problems, Sampler& sampler) {
    Check check("lq_perturbation_optimality", 1e-10);
    for (const auto& p : problems) {
        const BatchOperators ops = build_batch_operators(p.sys, p.weights, p.horizon);
        const TrackingGains gains = tracking_gains(ops);
        const Vector x0 = sampler.gaussian(ops.nx);
        const Vector r = sampler.gaussian(ops.horizon * ops.nr);
        const Vector u = open_loop_sequence(gains, x0, r);
        const double j0 = batch_cost(ops, x0, r, u);
        for (int t = 0; t < 5; ++t) {
            const Vector du = sampler.gaussian(static_cast<int>(u.size())) * std::pow(10.0, -sampler.integer(0, 4));
            const double j1 = batch_cost(ops, x0, r, u + du);
            check.observe(std::max(0.0, j0 - j1) / (1.0 + std::abs(j0)), p.label);
        }
    }
    return check.finish();
}

PropertyCheck check_rollout(const std::vector<Problem>& problems, Sampler& sampler) {
    Check check("batch_rollout_equivalence", 1e-12);
    for (const auto& p : problems) {
        if (p.horizon > 50) continue;
        const BatchOperators ops = build_batch_operators(p.sys, p.weights, p.horizon);
        const Vector x0 = sampler.gaussian(ops.nx);
        const Vector u = sampler.gaussian(ops.horizon * ops.nu);
        const Vector direct = rollout(p.sys, x0, u);
        const Vector batch = ops.a_bar * x0 + ops.b_bar * u;
        const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
        check.observe((direct - batch).cwiseAbs().maxCoeff() / scale, p.label);
    }
    return check.finish();
}

PropertyCheck check_row_sums(const std::vector<Problem>& problems, FaultInjection fault) {
    Check check("condensation_row_sums", 1e-9);
    bool corrupted = false;
    for (const auto& p : problems) {
        const TrackingGains gains = tracking_gains(build_batch_operators(p.sys, p.weights, p.horizon));
        for (auto map : maps_for(gains)) {
            if (fault == FaultInjection::corrupt_row_sum && !corrupted) {
                map.s(0, 0) += 1e-3;
                corrupted = true;
            }
            const Matrix ibar = stacked_identity(gains.nr, gains.horizon);
            const Matrix defect = map.s * ibar - Matrix::Identity(gains.nr, gains.nr);
            check.observe(defect.cwiseAbs().maxCoeff(), p.label + " " + map_label(map));
        }
    }
    return check.finish();
}

PropertyCheck check_exact_recovery(const std::vector<Problem>& problems, Sampler& sampler) {
    Check check("constant_preview_exact_recovery", 1e-9);
    for (const auto& p : problems) {
        const TrackingGains gains = tracking_gains(build_batch_operators(p.sys, p.weights, p.horizon));
        const Matrix ibar = stacked_identity(gains.nr, gains.horizon);
        const Vector c = sampler.gaussian(gains.nr);
        const Vector r = ibar * c;
        for (const auto& map : maps_for(gains)) {
            const Vector rbar = condense(map, r);
            const double setpoint_err = (rbar - c).norm() / (1.0 + c.norm());
            const double control_err = (gains.fr * r - gains.fr * ibar * rbar).norm() / (1.0 + (gains.fr * r).norm());
            check.observe(std::max(setpoint_err, control_err), p.label + " " + map_label(map));
        }
    }
    return check.finish();
}

PropertyCheck check_state_independence(const std::vector<Problem>& problems, Sampler& sampler) {
    Check check("mismatch_independent_of_x0", 1e-12);
    for (const auto& p : problems) {
        const TrackingGains gains = tracking_gains(build_batch_operators(p.sys, p.weights, p.horizon));
        const Matrix ibar = stacked_identity(gains.nr, gains.horizon);
        const CondensationMap map = unweighted_map(gains);
        const Vector r = sampler.gaussian(gains.horizon * gains.nr);
        const Vector rc = ibar * condense(map, r);
        const Vector x_ref = sampler.gaussian(gains.nx);
        const Vector base = open_loop_sequence(gains, x_ref, r) - open_loop_sequence(gains, x_ref, rc);
        for (int t = 0; t < 5; ++t) {
            const Vector x0 = sampler.gaussian(gains.nx) * 10.0;
            const Vector d = open_loop_sequence(gains, x0, r) - open_loop_sequence(gains, x0, rc);
            const double scale = 1.0 + (gains.fx * x0).norm();
            check.observe((d - base).norm() / scale, p.label);
        }
    }
    return check.finish();
}

PropertyCheck check_orthogonality(const std::vector<Problem>& problems, Sampler& sampler) {
    Check check("residual_orthogonality", 1e-8);
    for (const auto& p : problems) {
        const TrackingGains gains = tracking_gains(build_batch_operators(p.sys, p.weights, p.horizon));
        const Matrix fi = gains.fr * stacked_identity(gains.nr, gains.horizon);
        const Vector r = sampler.gaussian(gains.horizon * gains.nr);
        for (const auto& map : maps_for(gains)) {
            const Matrix w = weight_matrix(gains, map.rho);
            const Vector sqrt_w = w.diagonal().cwiseSqrt();
            const Vector e = gains.fr * r - fi * condense(map, r);
            const double denom = (sqrt_w.asDiagonal() * fi).norm() * (sqrt_w.asDiagonal() * gains.fr * r).norm();
            const double inner = (fi.transpose() * w * e).norm();
            check.observe(denom > 0.0 ? inner / denom : inner, p.label + " " + map_label(map));
        }
    }
    return check.finish();
}

PropertyCheck check_baselines(const std::vector<Problem>& problems, Sampler& sampler) {
    Check check("condensation_beats_baselines", 1e-12);
    for (const auto& p : problems) {
        const TrackingGains gains = tracking_gains(build_batch_operators(p.sys, p.weights, p.horizon));
        const Matrix ibar = stacked_identity(gains.nr, gains.horizon);
        const CondensationMap map = unweighted_map(gains);
        const Vector r = sampler.gaussian(gains.horizon * gains.nr);
        const auto err = [&](const Vector& c) { return (gains.fr * r - gains.fr * ibar * c).norm(); };
        const double best = err(condense(map, r));
        const int nr = gains.nr;
        const Vector candidates[] = {average_reference(r, nr), r.head(nr), r.tail(nr), Vector::Zero(nr),
                                     sampler.gaussian(nr)};
        for (const auto& c : candidates) {
            check.observe(std::max(0.0, best - err(c)) / (1.0 + best), p.label);
        }
    }
    return check.finish();
}

PropertyCheck check_control_bound(const std::vector<Problem>& problems, Sampler& sampler) {
    Check check("control_error_bound", 1e-12);
    for (const auto& p : problems) {
        const TrackingGains gains = tracking_gains(build_batch_operators(p.sys, p.weights, p.horizon));
        const Matrix ibar = stacked_identity(gains.nr, gains.horizon);
        const CondensationMap map = unweighted_map(gains);
        for (int t = 0; t < 2; ++t) {
            const Vector r = sampler.gaussian(gains.horizon * gains.nr);
            const double e = (gains.fr * r - gains.fr * ibar * condense(map, r)).norm();
            const double bound = control_error_bound(gains, r);
            check.observe(std::max(0.0, e - bound) / (1.0 + bound), p.label);
        }
    }
    return check.finish();
}

PropertyCheck check_closed_loop_bound() {
    Check check("closed_loop_deviation_bound", 1e-12);
    const LtiSystem sys = double_integrator(0.1);
    constexpr int kHorizon = 50;
    constexpr int kSteps = 200;
    const TrackingGains gains = tracking_gains(build_batch_operators(sys, unit_weights(), kHorizon));
    const FirstStepFeedback fb = unconstrained_feedback(gains);
    const Matrix ibar = stacked_identity(gains.nr, kHorizon);
    const std::pair<std::string, ReferenceSignal> signals[] = {
        {"step", ReferenceSignal::step(5.0, Vector::Zero(1), Vector::Ones(1))},
        {"sinusoid", ReferenceSignal::sinusoid(Vector::Ones(1), 0.5)},
    };
    for (const auto& map : {unweighted_map(gains), weighted_map(gains, 1e6)}) {
        for (const auto& [label, signal] : signals) {
            std::vector<Vector> windows;
            for (int k = 0; k < kSteps; ++k) windows.push_back(preview_window(signal, k, kHorizon, 0.1));
            const double bound = closed_loop_bound(gains, sys, map, windows);
            Vector x_full = Vector::Zero(2);
            Vector x_cond = Vector::Zero(2);
            double worst = 0.0;
            for (int k = 0; k < kSteps; ++k) {
                const Vector u_full = fb.kx * x_full + fb.kr * windows[k];
                const Vector u_cond = fb.kx * x_cond + fb.kr * (ibar * condense(map, windows[k]));
                x_full = sys.step(x_full, u_full);
                x_cond = sys.step(x_cond, u_cond);
                worst = std::max(worst, (x_full - x_cond).norm());
            }
            check.observe(std::max(0.0, worst - bound) / (1.0 + bound), label + " " + map_label(map));
        }
    }
    return check.finish();
}

PropertyCheck check_qp_oracle(Sampler& sampler, int count, Check& kkt) {
    Check check("qp_matches_enumeration", 1e-7);
    for (int i = 0; i < count; ++i) {
        const DenseQp qp = random_box_qp(sampler, sampler.integer(1, 8));
        const QpSolution sol = solve(qp);
        const auto oracle = enumerate_box_qp(qp);
        const std::string where = "box qp #" + std::to_string(i);
        kkt.observe(sol.status == QpStatus::optimal ? sol.kkt_residual : std::numeric_limits<double>::infinity(), where);
        if (!oracle) {
            check.observe(std::numeric_limits<double>::infinity(), where + " (oracle found nothing)");
            continue;
        }
        check.observe((sol.z - *oracle).cwiseAbs().maxCoeff(), where);
    }
    return check.finish();
}

void general_qp_kkt(Sampler& sampler, int count, Check& kkt) {
    for (int i = 0; i < count; ++i) {
        const int n = sampler.integer(2, 10);
        const int m = sampler.integer(1, 12);
        DenseQp qp = random_box_qp(sampler, n);
        qp.ineq_matrix = sampler.gaussian(m, n);
        // z = 0 is feasible for the box, keep it feasible for G too.
        qp.ineq_rhs = Vector::Zero(m);
        for (int j = 0; j < m; ++j) qp.ineq_rhs(j) = sampler.uniform(0.0, 1.0);
        const QpSolution sol = solve(qp);
        kkt.observe(sol.status == QpStatus::optimal ? sol.kkt_residual : std::numeric_limits<double>::infinity(),
                    "general qp #" + std::to_string(i));
    }
}

PropertyCheck check_warm_start(Sampler& sampler, int count) {
    Check check("qp_warm_start_consistency", 1e-9);
    for (int i = 0; i < count; ++i) {
        const int n = sampler.integer(1, 8);
        const DenseQp qp = random_box_qp(sampler, n);
        const QpSolution cold = solve(qp);
        QpSettings warm_exact;
        warm_exact.warm_start = cold.active_set;
        QpSettings warm_junk;
        ActiveSet junk;
        for (int j = 0; j < n; ++j) {
            const int pick = sampler.integer(0, 2);
            if (pick == 1 && std::isfinite(qp.lower(j))) junk.constraints.push_back(j);
            if (pick == 2 && std::isfinite(qp.upper(j))) junk.constraints.push_back(n + j);
        }
        warm_junk.warm_start = junk;
        for (const auto* settings : {&warm_exact, &warm_junk}) {
            const QpSolution warm = solve(qp, *settings);
            const double diff = warm.status == QpStatus::optimal ? (warm.z - cold.z).cwiseAbs().maxCoeff()
                                                                  : std::numeric_limits<double>::infinity();
            check.observe(diff, "qp #" + std::to_string(i));
        }
    }
    return check.finish();
}

PropertyCheck check_feasible_set(Sampler& sampler, Check& kkt) {
    Check check("feasible_set_independent_of_controller", 0.0);
    const LtiSystem sys = double_integrator(0.1);
    constexpr int kHorizon = 20;
    Matrix p(2, 2);
    p << 0.0, 1.0, 0.0, -1.0;
    const StatePolyhedron speed{p, Vector::Constant(2, 2.0)};
    const ControllerKind kinds[] = {ControllerKind::no_preview(), ControllerKind::average_reference(),
                                    ControllerKind::reference_condensation(),
                                    ControllerKind::reference_condensation(1e6), ControllerKind::full_preview()};
    std::vector<MpcController> controllers;
    for (const auto& kind : kinds) {
        controllers.emplace_back(sys, unit_weights(), kHorizon, kind, InputBounds::symmetric(1, 1.0), speed);
    }
    for (int t = 0; t < 20; ++t) {
        const Vector x = sampler.gaussian(2);
        const PreviewInput preview{sampler.gaussian(1), sampler.gaussian(kHorizon)};
        const DenseQp ref = controllers.front().build_qp(x, preview);
        for (auto& c : controllers) {
            const DenseQp qp = c.build_qp(x, preview);
            double diff = (qp.lower - ref.lower).cwiseAbs().maxCoeff();
            diff = std::max(diff, (qp.upper - ref.upper).cwiseAbs().maxCoeff());
            if (qp.ineq_matrix.rows() != ref.ineq_matrix.rows()) {
                diff = std::numeric_limits<double>::infinity();
            } else if (qp.ineq_matrix.rows() > 0) {
                diff = std::max(diff, (qp.ineq_matrix - ref.ineq_matrix).cwiseAbs().maxCoeff());
                diff = std::max(diff, (qp.ineq_rhs - ref.ineq_rhs).cwiseAbs().maxCoeff());
            }
            check.observe(diff, c.kind().name());
            try {
                kkt.observe(c.control_action(x, preview).qp.kkt_residual, "mpc " + c.kind().name());
            } catch (const QpInfeasibleError&) {
                // Random states can violate the speed limit irrecoverably; not a KKT failure.
            }
        }
    }
    return check.finish();
}

} // namespace

std::vector<PropertyCheck> run_property_suite(const VerifyOptions& options) {
    Sampler sampler(options.seed);
    const std::vector<Problem> problems = test_problems(sampler, options.random_cases);

    std::vector<PropertyCheck> checks;
    checks.push_back(check_gradient(problems, sampler));
    checks.push_back(check_perturbation(problems, sampler));
    checks.push_back(check_rollout(problems, sampler));
    checks.push_back(check_row_sums(problems, options.fault));
    checks.push_back(check_exact_recovery(problems, sampler));
    checks.push_back(check_state_independence(problems, sampler));
    checks.push_back(check_orthogonality(problems, sampler));
    checks.push_back(check_baselines(problems, sampler));
    checks.push_back(check_control_bound(problems, sampler));
    checks.push_back(check_closed_loop_bound());

    Check kkt("qp_kkt_residual", 1e-8);
    checks.push_back(check_qp_oracle(sampler, options.random_cases, kkt));
    general_qp_kkt(sampler, options.random_cases, kkt);
    checks.push_back(check_warm_start(sampler, options.random_cases));
    checks.push_back(check_feasible_set(sampler, kkt));
    checks.push_back(kkt.finish());
    return checks;
}

bool all_passed(const std::vector<PropertyCheck>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

void write_property_report(const std::vector<PropertyCheck>& checks, std::ostream& out) {
    for (const auto& c : checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << " worst=" << std::setprecision(3) << c.worst
            << " tol=" << c.tolerance << "  (" << c.detail << ")\n";
    }
}

} // namespace refcond
