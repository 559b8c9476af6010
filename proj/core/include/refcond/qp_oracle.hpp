#pragma once

#include <optional>

#include "refcond/qp_solver.hpp"

namespace refcond {

/// Brute-force reference solution of a box-constrained strictly convex QP.
/// Every one of the 3^n (free / at lower / at upper) configurations is solved as an
/// equality-constrained system and checked for primal and dual feasibility.
/// Intended for n <= 10; independent of the active-set solver.
std::optional<Vector> enumerate_box_qp(const DenseQp& qp, double tol = 1e-9);

} // namespace refcond
