#include "refcond/mpc_qp.hpp"

#include <limits>
#include <vector>

namespace refcond {

InputBounds InputBounds::unbounded(int nu) {
    const double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(nu, -inf), Vector::Constant(nu, inf)};
}

InputBounds InputBounds::symmetric(int nu, double limit) {
    return {Vector::Constant(nu, -limit), Vector::Constant(nu, limit)};
}

DenseQp build_mpc_qp(const BatchOperators& ops,
                     const Vector& x,
                     const Vector& reference,
                     const InputBounds& input_bounds,
                     const std::optional<StatePolyhedron>& state_constraints) {
    require(x.size() == ops.nx, "build_mpc_qp: state has wrong size");
    require(reference.size() == static_cast<Eigen::Index>(ops.horizon) * ops.nr,
            "build_mpc_qp: stacked reference has wrong size");
    require(input_bounds.lower.size() == ops.nu && input_bounds.upper.size() == ops.nu,
            "build_mpc_qp: input bounds must have nu entries");

    const int n = ops.horizon;
    DenseQp qp;
    qp.hessian = ops.hessian;
    qp.hessian_factor = ops.hessian_factor;
    qp.linear = ops.output_gain * (ops.output_free * x - reference);
    qp.lower = input_bounds.lower.replicate(n, 1);
    qp.upper = input_bounds.upper.replicate(n, 1);

    qp.ineq_matrix.resize(0, n * ops.nu);
    qp.ineq_rhs.resize(0);
    if (!state_constraints) return qp;

    const Matrix& pm = state_constraints->p_matrix;
    const Vector& pv = state_constraints->p_vector;
    require(pm.cols() == ops.nx && pv.size() == pm.rows(), "build_mpc_qp: state polyhedron has wrong size");

    std::vector<Eigen::Index> keep_rows;
    Matrix g_all(pm.rows() * n, n * ops.nu);
    Vector h_all(pm.rows() * n);
    for (int k = 0; k < n; ++k) {
        const auto a_k = ops.a_bar.middleRows(k * ops.nx, ops.nx);
        const auto b_k = ops.b_bar.middleRows(k * ops.nx, ops.nx);
        g_all.middleRows(k * pm.rows(), pm.rows()) = pm * b_k;
        h_all.segment(k * pm.rows(), pm.rows()) = pv - pm * (a_k * x);
    }
    for (Eigen::Index i = 0; i < g_all.rows(); ++i) {
        const bool zero_row = g_all.row(i).cwiseAbs().maxCoeff() == 0.0;
        if (zero_row && h_all(i) >= 0.0) continue;
        keep_rows.push_back(i);
    }
    qp.ineq_matrix.resize(static_cast<Eigen::Index>(keep_rows.size()), n * ops.nu);
    qp.ineq_rhs.resize(static_cast<Eigen::Index>(keep_rows.size()));
    for (std::size_t j = 0; j < keep_rows.size(); ++j) {
        qp.ineq_matrix.row(static_cast<Eigen::Index>(j)) = g_all.row(keep_rows[j]);
        qp.ineq_rhs(static_cast<Eigen::Index>(j)) = h_all(keep_rows[j]);
    }
    return qp;
}

} // namespace refcond
