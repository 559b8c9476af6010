#include "refcond/condensation.hpp"

#include <cmath>
#include <limits>

namespace refcond {

namespace {

void check_gains(const TrackingGains& g) {
    require(g.horizon >= 1 && g.nr >= 1 && g.nu >= 1, "condensation: gains are not initialised");
    require(g.fr.rows() == static_cast<Eigen::Index>(g.horizon) * g.nu &&
                g.fr.cols() == static_cast<Eigen::Index>(g.horizon) * g.nr,
            "condensation: Fr has inconsistent dimensions");
}

} // namespace

CondensationMap unweighted_map(const TrackingGains& gains) {
    check_gains(gains);
    const Matrix fr_i = gains.fr * stacked_identity(gains.nr, gains.horizon);

    CondensationMap map;
    map.kind = CondensationKind::unweighted;
    map.rho = 1.0;

    Eigen::JacobiSVD<Matrix> svd(fr_i, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    if (sigma_max == 0.0) {
        map.s = Matrix::Zero(gains.nr, gains.fr.cols());
        map.rank_ok = false;
        return map;
    }
    const double tol_rank = static_cast<double>(std::max(fr_i.rows(), fr_i.cols())) *
                            std::numeric_limits<double>::epsilon() * sigma_max;

    Vector sigma_inv = Vector::Zero(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > tol_rank) sigma_inv(i) = 1.0 / sigma(i);
    }
    const Matrix pinv = svd.matrixV() * sigma_inv.asDiagonal() * svd.matrixU().transpose();
    map.s = pinv * gains.fr;
    map.rank_ok = sigma(sigma.size() - 1) > tol_rank;
    return map;
}

CondensationMap weighted_map(const TrackingGains& gains, double rho) {
    check_gains(gains);
    if (!(std::isfinite(rho) && rho > 0.0)) {
        throw DimensionError("weighted_map: rho must be positive and finite");
    }
    const Eigen::Index n = gains.fr.rows();
    Vector diag = Vector::Ones(n);
    diag.head(gains.nu).setConstant(rho * rho);

    // Row-scaling Fr by sqrt(W) keeps the normal matrix well scaled for large rho.
    const Matrix fr_i = gains.fr * stacked_identity(gains.nr, gains.horizon);
    const Vector scale = diag.cwiseSqrt();
    const Matrix weighted_fr_i = scale.asDiagonal() * fr_i;
    const Matrix weighted_fr = scale.asDiagonal() * gains.fr;

    CondensationMap map;
    map.kind = CondensationKind::weighted;
    map.rho = rho;

    Eigen::ColPivHouseholderQR<Matrix> qr(weighted_fr_i);
    const double tol_rank = static_cast<double>(std::max(fr_i.rows(), fr_i.cols())) *
                            std::numeric_limits<double>::epsilon();
    qr.setThreshold(tol_rank);
    if (qr.rank() < fr_i.cols() || fr_i.cwiseAbs().maxCoeff() == 0.0) {
        throw NumericalError("weighted_map: Fr * Ibar is rank deficient");
    }
    map.s = qr.solve(weighted_fr);
    map.rank_ok = true;
    return map;
}

CondensationMap weighted_map(const TrackingGains& gains, const Matrix& weight) {
    check_gains(gains);
    require(weight.rows() == gains.fr.rows() && weight.cols() == gains.fr.rows(),
            "weighted_map: W must be N nu x N nu");
    const Matrix fr_i = gains.fr * stacked_identity(gains.nr, gains.horizon);
    const Matrix normal = fr_i.transpose() * weight * fr_i;
    Eigen::LDLT<Matrix> ldlt(0.5 * (normal + normal.transpose()));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= std::numeric_limits<double>::epsilon() * ldlt.vectorD().cwiseAbs().maxCoeff()) {
        throw NumericalError("weighted_map: Ibar' Fr' W Fr Ibar is singular");
    }
    CondensationMap map;
    map.kind = CondensationKind::weighted;
    map.rho = std::sqrt(weight(0, 0));
    map.s = ldlt.solve(fr_i.transpose() * weight * gains.fr);
    map.rank_ok = true;
    return map;
}

Vector condense(const CondensationMap& map, const Vector& r) {
    require(r.size() == map.s.cols(), "condense: preview has wrong length");
    return map.s * r;
}

Vector average_reference(const Vector& r, int nr) {
    require(nr >= 1 && r.size() >= nr && r.size() % nr == 0, "average_reference: length must be a positive multiple of nr");
    const Eigen::Index n = r.size() / nr;
    Vector sum = Vector::Zero(nr);
    for (Eigen::Index k = 0; k < n; ++k) sum += r.segment(k * nr, nr);
    return sum / static_cast<double>(n);
}

double control_error_bound(const TrackingGains& gains, const Vector& r) {
    check_gains(gains);
    require(r.size() == gains.fr.cols(), "control_error_bound: preview has wrong length");
    const Vector avg = average_reference(r, gains.nr);
    const Vector deviation = r - stacked_identity(gains.nr, gains.horizon) * avg;
    return gains.fr_norm * deviation.norm();
}

DecayEstimate estimate_decay(const Matrix& a_cl, int horizon_checked) {
    require(a_cl.rows() == a_cl.cols() && a_cl.rows() > 0, "estimate_decay: A_cl must be square");
    require(horizon_checked >= 0, "estimate_decay: horizon must be non-negative");
    const double radius = spectral_radius(a_cl);
    if (!(radius < 1.0)) {
        throw NumericalError("estimate_decay: closed-loop spectral radius >= 1");
    }
    DecayEstimate est;
    est.lambda = 0.5 * (radius + 1.0);
    est.horizon_checked = horizon_checked;

    // scaled = (A_cl / lambda)^i, so its norm is ||A_cl^i|| / lambda^i without underflow.
    const Matrix ratio = a_cl / est.lambda;
    Matrix scaled = Matrix::Identity(a_cl.rows(), a_cl.cols());
    double c = spectral_norm(scaled);
    for (int i = 1; i <= horizon_checked; ++i) {
        scaled = ratio * scaled;
        c = std::max(c, spectral_norm(scaled));
    }
    est.c = std::max(1.0, c);
    return est;
}

Matrix closed_loop_matrix(const LtiSystem& sys, const TrackingGains& gains) {
    require(gains.nx == sys.nx() && gains.nu == sys.nu(), "closed_loop_matrix: gains do not match system");
    return sys.a() + sys.b() * gains.fx.topRows(gains.nu);
}

double closed_loop_bound(const TrackingGains& gains,
                         const LtiSystem& sys,
                         const CondensationMap& map,
                         std::span<const Vector> windows,
                         int horizon_checked) {
    check_gains(gains);
    require(map.s.cols() == gains.fr.cols(), "closed_loop_bound: map does not match gains");
    const DecayEstimate decay = estimate_decay(closed_loop_matrix(sys, gains), horizon_checked);
    const Matrix ibar = stacked_identity(gains.nr, gains.horizon);

    double worst = 0.0;
    for (const Vector& w : windows) {
        require(w.size() == gains.fr.cols(), "closed_loop_bound: window has wrong length");
        worst = std::max(worst, (w - ibar * (map.s * w)).norm());
    }
    const double input_gain = spectral_norm(sys.b() * gains.fr.topRows(gains.nu));
    return decay.c * input_gain / (1.0 - decay.lambda) * worst;
}

} // namespace refcond
