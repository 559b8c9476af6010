#pragma once

#include <optional>

#include "refcond/lq_batch.hpp"
#include "refcond/qp_solver.hpp"

namespace refcond {

/// Per-step input box, replicated over the horizon. Entries may be +-infinity.
struct InputBounds {
    Vector lower;
    Vector upper;

    static InputBounds unbounded(int nu);
    static InputBounds symmetric(int nu, double limit);
};

/// Polyhedral state constraint P x_k <= p imposed on x_1, ..., x_N.
struct StatePolyhedron {
    Matrix p_matrix;
    Vector p_vector;
};

/// Condensed MPC QP in the stacked inputs u:
///   H from the batch operators, f = Bbar' Cbar' Qbar (Cbar Abar x - r),
///   state rows mapped through x = Abar x0 + Bbar u. All-zero rows with
///   nonnegative right-hand side are dropped; with a negative one they are kept
///   so the solver reports infeasibility.
DenseQp build_mpc_qp(const BatchOperators& ops,
                     const Vector& x,
                     const Vector& reference,
                     const InputBounds& input_bounds,
                     const std::optional<StatePolyhedron>& state_constraints = std::nullopt);

} // namespace refcond
