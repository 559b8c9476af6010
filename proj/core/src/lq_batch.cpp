#include "refcond/lq_batch.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace refcond {

namespace {

bool is_symmetric(const Matrix& m, double rel_tol) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Matrix block_diagonal(const Matrix& block, int copies) {
    Matrix out = Matrix::Zero(block.rows() * copies, block.cols() * copies);
    for (int i = 0; i < copies; ++i) {
        out.block(i * block.rows(), i * block.cols(), block.rows(), block.cols()) = block;
    }
    return out;
}

} // namespace

LtiSystem::LtiSystem(Matrix A, Matrix B, Matrix C, double sample_time)
    : a_(std::move(A)), b_(std::move(B)), c_(std::move(C)), ts_(sample_time) {
    require(a_.rows() > 0 && a_.rows() == a_.cols(), "LtiSystem: A must be square and non-empty");
    require(b_.rows() == a_.rows() && b_.cols() > 0, "LtiSystem: B must have nx rows and at least one column");
    require(c_.cols() == a_.rows() && c_.rows() > 0, "LtiSystem: C must have nx columns and at least one row");
    require(std::isfinite(ts_) && ts_ > 0.0, "LtiSystem: sample time must be positive");
    require(a_.allFinite() && b_.allFinite() && c_.allFinite(), "LtiSystem: matrices must be finite");
}

Vector LtiSystem::step(const Vector& x, const Vector& u) const {
    require(x.size() == nx() && u.size() == nu(), "LtiSystem::step: dimension mismatch");
    return a_ * x + b_ * u;
}

LtiSystem LtiSystem::from_continuous(const Matrix& Ac, const Matrix& Bc, Matrix C, double sample_time) {
    require(Ac.rows() > 0 && Ac.rows() == Ac.cols() && Bc.rows() == Ac.rows() && Bc.cols() > 0,
            "LtiSystem::from_continuous: Ac must be square and Bc must have nx rows");
    require(std::isfinite(sample_time) && sample_time > 0.0, "LtiSystem::from_continuous: sample time must be positive");
    const Eigen::Index nx = Ac.rows();
    const Eigen::Index nu = Bc.cols();
    // exp([[Ac, Bc], [0, 0]] Ts) = [[A, B], [0, I]]
    Matrix augmented = Matrix::Zero(nx + nu, nx + nu);
    augmented.topLeftCorner(nx, nx) = Ac * sample_time;
    augmented.topRightCorner(nx, nu) = Bc * sample_time;
    const Matrix phi = augmented.exp();
    return LtiSystem(phi.topLeftCorner(nx, nx), phi.topRightCorner(nx, nu), std::move(C), sample_time);
}

TrackingWeights::TrackingWeights(Matrix Q, Matrix R) : q_(std::move(Q)), r_(std::move(R)) {
    require(q_.rows() > 0 && q_.rows() == q_.cols(), "TrackingWeights: Q must be square");
    require(r_.rows() > 0 && r_.rows() == r_.cols(), "TrackingWeights: R must be square");
    require(is_symmetric(q_, 1e-10), "TrackingWeights: Q must be symmetric");
    require(is_symmetric(r_, 1e-10), "TrackingWeights: R must be symmetric");

    const Matrix q_sym = 0.5 * (q_ + q_.transpose());
    const Matrix r_sym = 0.5 * (r_ + r_.transpose());
    const double tol_psd = 1e-9 * spectral_norm(q_sym);
    const double tol_pd = 1e-12 * spectral_norm(r_sym);
    Eigen::SelfAdjointEigenSolver<Matrix> q_eig(q_sym, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> r_eig(r_sym, Eigen::EigenvaluesOnly);
    if (q_eig.eigenvalues().minCoeff() < -tol_psd) {
        throw NumericalError("TrackingWeights: Q is not positive semidefinite");
    }
    if (!(r_eig.eigenvalues().minCoeff() > tol_pd)) {
        throw NumericalError("TrackingWeights: R is not positive definite");
    }
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double spectral_radius(const Matrix& m) {
    require(m.rows() == m.cols(), "spectral_radius: matrix must be square");
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix stacked_identity(int n, int horizon) {
    require(n > 0 && horizon > 0, "stacked_identity: positive sizes required");
    Matrix out(static_cast<Eigen::Index>(n) * horizon, n);
    for (int k = 0; k < horizon; ++k) out.middleRows(k * n, n).setIdentity();
    return out;
}

BatchOperators build_batch_operators(const LtiSystem& sys, const TrackingWeights& weights, int horizon) {
    require(horizon >= 1, "build_batch_operators: horizon must be >= 1");
    require(weights.q().rows() == sys.nr(), "build_batch_operators: Q must be nr x nr");
    require(weights.r().rows() == sys.nu(), "build_batch_operators: R must be nu x nu");

    const int nx = sys.nx();
    const int nu = sys.nu();
    const int n = horizon;

    BatchOperators ops;
    ops.horizon = n;
    ops.nx = nx;
    ops.nu = nu;
    ops.nr = sys.nr();

    // impulse[k] = A^k B
    std::vector<Matrix> impulse(n);
    impulse[0] = sys.b();
    for (int k = 1; k < n; ++k) impulse[k] = sys.a() * impulse[k - 1];

    ops.a_bar.resize(n * nx, nx);
    Matrix power = sys.a();
    for (int k = 0; k < n; ++k) {
        ops.a_bar.middleRows(k * nx, nx) = power;
        power = sys.a() * power;
    }

    ops.b_bar = Matrix::Zero(n * nx, n * nu);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            ops.b_bar.block(i * nx, j * nu, nx, nu) = impulse[i - j];
        }
    }

    ops.c_bar = block_diagonal(sys.c(), n);
    ops.q_bar = block_diagonal(weights.q(), n);
    ops.r_bar = block_diagonal(weights.r(), n);

    const Matrix cb = ops.c_bar * ops.b_bar;
    ops.output_gain = cb.transpose() * ops.q_bar;
    ops.output_free = ops.c_bar * ops.a_bar;
    ops.hessian = ops.output_gain * cb + ops.r_bar;
    ops.hessian = 0.5 * (ops.hessian + ops.hessian.transpose());

    auto factor = std::make_shared<Eigen::LLT<Matrix>>(ops.hessian);
    if (factor->info() != Eigen::Success) {
        throw NumericalError("build_batch_operators: Hessian is not positive definite (check weights)");
    }
    ops.hessian_factor = std::move(factor);
    return ops;
}

TrackingGains tracking_gains(const BatchOperators& ops) {
    require(ops.hessian_factor != nullptr, "tracking_gains: operators not built");
    const auto& llt = *ops.hessian_factor;
    const double rcond = llt.rcond();
    if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
        std::ostringstream msg;
        msg << "tracking_gains: Hessian is ill-conditioned (condition estimate " << 1.0 / rcond << ")";
        throw NumericalError(msg.str());
    }

    TrackingGains g;
    g.horizon = ops.horizon;
    g.nx = ops.nx;
    g.nu = ops.nu;
    g.nr = ops.nr;
    g.fr = llt.solve(ops.output_gain);
    g.fx = -g.fr * ops.output_free;
    g.fr_norm = spectral_norm(g.fr);
    return g;
}

Vector open_loop_sequence(const TrackingGains& gains, const Vector& x0, const Vector& r) {
    require(x0.size() == gains.nx, "open_loop_sequence: x0 has wrong size");
    require(r.size() == gains.fr.cols(), "open_loop_sequence: reference has wrong size");
    return gains.fx * x0 + gains.fr * r;
}

Vector rollout(const LtiSystem& sys, const Vector& x0, const Vector& u) {
    require(x0.size() == sys.nx(), "rollout: x0 has wrong size");
    require(u.size() % sys.nu() == 0, "rollout: control length is not a multiple of nu");
    const int n = static_cast<int>(u.size() / sys.nu());
    Vector out(static_cast<Eigen::Index>(n) * sys.nx());
    Vector x = x0;
    for (int k = 0; k < n; ++k) {
        x = sys.a() * x + sys.b() * u.segment(k * sys.nu(), sys.nu());
        out.segment(k * sys.nx(), sys.nx()) = x;
    }
    return out;
}

double batch_cost(const BatchOperators& ops, const Vector& x0, const Vector& r, const Vector& u) {
    require(x0.size() == ops.nx && r.size() == ops.c_bar.rows() && u.size() == ops.b_bar.cols(),
            "batch_cost: dimension mismatch");
    const Vector e = ops.output_free * x0 + ops.c_bar * (ops.b_bar * u) - r;
    return e.dot(ops.q_bar * e) + u.dot(ops.r_bar * u);
}

Vector batch_cost_gradient(const BatchOperators& ops, const Vector& x0, const Vector& r, const Vector& u) {
    require(x0.size() == ops.nx && r.size() == ops.c_bar.rows() && u.size() == ops.b_bar.cols(),
            "batch_cost_gradient: dimension mismatch");
    return 2.0 * (ops.hessian * u + ops.output_gain * (ops.output_free * x0 - r));
}

} // namespace refcond
