#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "refcond/types.hpp"

namespace refcond {

/// min 1/2 z'Hz + f'z  s.t.  lower <= z <= upper,  G z <= g.
/// Bound entries may be +-infinity; G may have zero rows.
struct DenseQp {
    Matrix hessian;
    Vector linear;
    Vector lower;
    Vector upper;
    Matrix ineq_matrix;
    Vector ineq_rhs;

    /// Optional precomputed Cholesky factor of the Hessian.
    std::shared_ptr<const Eigen::LLT<Matrix>> hessian_factor;

    int num_variables() const { return static_cast<int>(hessian.rows()); }
    int num_inequalities() const { return static_cast<int>(ineq_matrix.rows()); }
};

/// Constraint identifiers used by active sets and certificates:
///   [0, n)        lower bound on z_i
///   [n, 2n)       upper bound on z_i
///   [2n, 2n + m)  row j of G
struct ActiveSet {
    std::vector<int> constraints;
};

enum class QpStatus { optimal, infeasible, max_iterations, inaccurate };

std::string to_string(QpStatus status);

struct QpSettings {
    double tol_kkt = 1e-8;
    int max_iterations = 0;  // 0 selects 10 * (n + number of constraint rows)
    std::optional<ActiveSet> warm_start;
};

struct QpSolution {
    Vector z;
    QpStatus status = QpStatus::max_iterations;
    Vector lower_duals;   // >= 0, nonzero only on active lower bounds
    Vector upper_duals;   // >= 0, nonzero only on active upper bounds
    Vector ineq_duals;    // >= 0, one per row of G
    ActiveSet active_set;
    int iterations = 0;
    double kkt_residual = 0.0;
    double objective = 0.0;
    /// For status infeasible: y >= 0 over constraint ids with sum_i y_i a_i = 0 and
    /// sum_i y_i b_i < 0 (constraints written as a_i' z <= b_i).
    Vector infeasibility_certificate;
};

/// Goldfarb-Idnani dual active-set method for strictly convex dense QPs.
/// Throws DimensionError on malformed data or lower > upper, NumericalError if H is not PD.
QpSolution solve(const DenseQp& qp, const QpSettings& settings = {});

/// Max of stationarity, primal infeasibility, dual infeasibility and complementarity.
double kkt_residual(const DenseQp& qp, const Vector& z, const Vector& lower_duals,
                    const Vector& upper_duals, const Vector& ineq_duals);

double objective(const DenseQp& qp, const Vector& z);

} // namespace refcond
