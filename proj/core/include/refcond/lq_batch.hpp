#pragma once

#include <memory>

#include "refcond/types.hpp"

namespace refcond {

/// Discrete-time plant x_{k+1} = A x_k + B u_k with tracked output C x_k.
class LtiSystem {
public:
    LtiSystem(Matrix A, Matrix B, Matrix C, double sample_time);

    const Matrix& a() const { return a_; }
    const Matrix& b() const { return b_; }
    const Matrix& c() const { return c_; }
    double sample_time() const { return ts_; }

    int nx() const { return static_cast<int>(a_.rows()); }
    int nu() const { return static_cast<int>(b_.cols()); }
    int nr() const { return static_cast<int>(c_.rows()); }

    Vector step(const Vector& x, const Vector& u) const;

    /// Zero-order-hold discretisation of dx/dt = Ac x + Bc u.
    static LtiSystem from_continuous(const Matrix& Ac, const Matrix& Bc, Matrix C, double sample_time);

private:
    Matrix a_;
    Matrix b_;
    Matrix c_;
    double ts_;
};

/// Output weight Q (PSD) and input weight R (PD). Validated on construction.
class TrackingWeights {
public:
    TrackingWeights(Matrix Q, Matrix R);

    const Matrix& q() const { return q_; }
    const Matrix& r() const { return r_; }

private:
    Matrix q_;
    Matrix r_;
};

/// Batch form of the N-step tracking problem. States are eliminated through
///   x = Abar x0 + Bbar u,   J = ||Cbar x - r||^2_Qbar + ||u||^2_Rbar.
struct BatchOperators {
    int horizon = 0;
    int nx = 0;
    int nu = 0;
    int nr = 0;

    Matrix a_bar;  // N nx x nx
    Matrix b_bar;  // N nx x N nu, block (i,j) = A^(i-j) B for i >= j
    Matrix c_bar;  // N nr x N nx
    Matrix q_bar;
    Matrix r_bar;
    Matrix hessian;         // Bbar' Cbar' Qbar Cbar Bbar + Rbar
    Matrix output_gain;     // Bbar' Cbar' Qbar       (N nu x N nr)
    Matrix output_free;     // Cbar Abar              (N nr x nx)

    /// Cholesky factor of the Hessian, shared by gains and QP assembly.
    std::shared_ptr<const Eigen::LLT<Matrix>> hessian_factor;
};

/// Affine optimal unconstrained policy u*(x0, r) = Fx x0 + Fr r.
struct TrackingGains {
    int horizon = 0;
    int nx = 0;
    int nu = 0;
    int nr = 0;
    Matrix fx;
    Matrix fr;
    double fr_norm = 0.0;  // largest singular value of Fr
};

BatchOperators build_batch_operators(const LtiSystem& sys, const TrackingWeights& weights, int horizon);

TrackingGains tracking_gains(const BatchOperators& ops);

Vector open_loop_sequence(const TrackingGains& gains, const Vector& x0, const Vector& r);

/// Applies the plant recursion N = len(u)/nu times and returns (x_1, ..., x_N) stacked.
Vector rollout(const LtiSystem& sys, const Vector& x0, const Vector& u);

/// Batch tracking cost J(u; x0, r).
double batch_cost(const BatchOperators& ops, const Vector& x0, const Vector& r, const Vector& u);

/// dJ/du = 2 H u + 2 Bbar' Cbar' Qbar (Cbar Abar x0 - r).
Vector batch_cost_gradient(const BatchOperators& ops, const Vector& x0, const Vector& r, const Vector& u);

/// N vertically stacked copies of the n x n identity.
Matrix stacked_identity(int n, int horizon);

double spectral_norm(const Matrix& m);
double spectral_radius(const Matrix& m);

} // namespace refcond
