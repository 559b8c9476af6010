#pragma once

#include <span>
#include <vector>

#include "refcond/lq_batch.hpp"

namespace refcond {

enum class CondensationKind { unweighted, weighted };

/// Linear map from a stacked preview (r_1, ..., r_N) to one setpoint, rbar = S r.
struct CondensationMap {
    Matrix s;  // nr x N nr
    CondensationKind kind = CondensationKind::unweighted;
    /// First-block residual scale of the weighted map; the LS weight is
    /// W = blockdiag(rho^2 I, I, ..., I). Equal to 1 for the unweighted map.
    double rho = 1.0;
    /// Fr * Ibar had full column rank when the map was built.
    bool rank_ok = false;
};

/// Minimum-norm least-squares map S = (Fr Ibar)^+ Fr.
/// A vanishing Fr Ibar (e.g. Q = 0) yields S = 0 with rank_ok = false.
CondensationMap unweighted_map(const TrackingGains& gains);

/// Weighted map S_W = (Ibar' Fr' W Fr Ibar)^{-1} Ibar' Fr' W Fr with
/// W = blockdiag(rho^2 I_nu, I_nu, ..., I_nu), emphasising the first applied control.
CondensationMap weighted_map(const TrackingGains& gains, double rho);

/// Same, for an arbitrary symmetric positive definite weight W (N nu x N nu).
CondensationMap weighted_map(const TrackingGains& gains, const Matrix& weight);

Vector condense(const CondensationMap& map, const Vector& r);

/// Arithmetic mean of the N stacked nr-blocks of r.
Vector average_reference(const Vector& r, int nr);

/// sigma_max(Fr) * ||r - Ibar r_avg||_2; dominates ||Fr r - Fr Ibar S r||_2.
double control_error_bound(const TrackingGains& gains, const Vector& r);

/// Constants with ||A_cl^i||_2 <= c lambda^i for i = 0..horizon_checked.
struct DecayEstimate {
    double c = 1.0;
    double lambda = 0.0;
    int horizon_checked = 0;
};

/// lambda = (rho(A_cl) + 1) / 2 and c fitted over the checked powers.
/// Throws NumericalError when the spectral radius is >= 1.
DecayEstimate estimate_decay(const Matrix& a_cl, int horizon_checked = 1000);

/// A + B [Fx]_1, the state matrix under first-step unconstrained feedback.
Matrix closed_loop_matrix(const LtiSystem& sys, const TrackingGains& gains);

/// c ||B [Fr]_1||_2 / (1 - lambda) * max_j ||r_j - Ibar S r_j||_2 over the given windows.
double closed_loop_bound(const TrackingGains& gains,
                         const LtiSystem& sys,
                         const CondensationMap& map,
                         std::span<const Vector> windows,
                         int horizon_checked = 1000);

} // namespace refcond
