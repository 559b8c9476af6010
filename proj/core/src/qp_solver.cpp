#include "refcond/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace refcond {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraint rows in the form a' z <= b, addressed by the ids documented in ActiveSet.
class ConstraintRows {
public:
    explicit ConstraintRows(const DenseQp& qp)
        : qp_(qp), n_(qp.num_variables()), m_(qp.num_inequalities()) {}

    int count() const { return 2 * n_ + m_; }

    bool is_zero_row(int id) const {
        return id >= 2 * n_ && qp_.ineq_matrix.row(id - 2 * n_).cwiseAbs().maxCoeff() == 0.0;
    }

    bool available(int id) const {
        if (id < 0 || id >= count()) return false;
        if (id < n_) return std::isfinite(qp_.lower(id));
        if (id < 2 * n_) return std::isfinite(qp_.upper(id - n_));
        return !is_zero_row(id);
    }

    double value(int id, const Vector& z) const {
        if (id < n_) return -z(id);
        if (id < 2 * n_) return z(id - n_);
        return qp_.ineq_matrix.row(id - 2 * n_).dot(z);
    }

    double rhs(int id) const {
        if (id < n_) return -qp_.lower(id);
        if (id < 2 * n_) return qp_.upper(id - n_);
        return qp_.ineq_rhs(id - 2 * n_);
    }

    Vector normal(int id) const {
        if (id < 2 * n_) {
            Vector a = Vector::Zero(n_);
            a(id % n_) = id < n_ ? -1.0 : 1.0;
            return a;
        }
        return qp_.ineq_matrix.row(id - 2 * n_).transpose();
    }

private:
    const DenseQp& qp_;
    int n_;
    int m_;
};

// Active normals in the metric of H^{-1}: M = L^{-1} A_act' = Q1 R, with H = L L'.
class ActiveFactor {
public:
    ActiveFactor(const Eigen::LLT<Matrix>& llt, int n) : llt_(llt), n_(n) {}

    void rebuild(const ConstraintRows& rows, const std::vector<int>& active) {
        q_ = static_cast<int>(active.size());
        if (q_ == 0) return;
        Matrix m(n_, q_);
        for (int j = 0; j < q_; ++j) m.col(j) = rows.normal(active[j]);
        llt_.matrixL().solveInPlace(m);
        qr_.compute(m);
    }

    Vector whiten(const Vector& a) const { return llt_.matrixL().solve(a); }
    Vector unwhiten(const Vector& w) const { return llt_.matrixU().solve(w); }

    // v = w + M coef with w orthogonal to span(M).
    void project(const Vector& v, Vector& w, Vector& coef) const {
        if (q_ == 0) {
            w = v;
            coef.resize(0);
            return;
        }
        Vector y = qr_.householderQ().transpose() * v;
        coef = upper().solve(y.head(q_));
        y.head(q_).setZero();
        w = qr_.householderQ() * y;
    }

    // Solves (A H^{-1} A') x = rhs, i.e. R'R x = rhs.
    Vector solve_normal(const Vector& rhs) const {
        if (q_ == 0) return Vector(0);
        Vector x = upper().transpose().solve(rhs);
        return upper().solve(x);
    }

    // H^{-1} A' mu = L^{-T} M mu
    Vector inverse_hessian_times_normals(const Vector& mu) const {
        if (q_ == 0) return Vector::Zero(n_);
        Vector y = Vector::Zero(n_);
        y.head(q_) = upper() * mu;
        return unwhiten(qr_.householderQ() * y);
    }

private:
    using UpperView = Eigen::TriangularView<const Eigen::Block<const Matrix>, Eigen::Upper>;
    const UpperView upper() const { return qr_.matrixQR().topLeftCorner(q_, q_).triangularView<Eigen::Upper>(); }

    const Eigen::LLT<Matrix>& llt_;
    int n_;
    int q_ = 0;
    Eigen::HouseholderQR<Matrix> qr_;
};

class DualActiveSetSolver {
public:
    DualActiveSetSolver(const DenseQp& qp, const Eigen::LLT<Matrix>& llt, const QpSettings& settings)
        : qp_(qp), rows_(qp), factor_(llt, qp.num_variables()), settings_(settings) {
        n_ = qp.num_variables();
        z_free_ = llt.solve(-qp.linear);
        int finite_rows = 0;
        for (int id = 0; id < rows_.count(); ++id) finite_rows += rows_.available(id) ? 1 : 0;
        max_iterations_ = settings.max_iterations > 0 ? settings.max_iterations : 10 * (n_ + finite_rows);
    }

    QpSolution run() {
        QpSolution sol;
        if (auto bad = trivially_infeasible_row()) {
            sol.status = QpStatus::infeasible;
            sol.z = z_free_;
            sol.infeasibility_certificate = Vector::Zero(rows_.count());
            sol.infeasibility_certificate(*bad) = 1.0;
            fill_duals(sol);
            return sol;
        }

        initialise();

        while (true) {
            const int p = most_violated();
            if (p < 0) break;

            double mu_p = 0.0;
            const Vector a_p = rows_.normal(p);
            bool added = false;
            while (!added) {
                if (++iterations_ > max_iterations_) {
                    sol.status = QpStatus::max_iterations;
                    return finish(sol, false);
                }
                const Vector v = factor_.whiten(a_p);
                Vector w;
                Vector r;
                factor_.project(v, w, r);
                const double curvature = w.squaredNorm();
                const bool dependent = curvature <= 1e-14 * std::max(1.0, v.squaredNorm());

                double t_partial = kInf;
                int drop = -1;
                for (int j = 0; j < r.size(); ++j) {
                    if (r(j) > 0.0) {
                        const double t = mu_(j) / r(j);
                        if (t < t_partial) {
                            t_partial = t;
                            drop = j;
                        }
                    }
                }
                const double t_full = dependent ? kInf : (rows_.value(p, z_) - rows_.rhs(p)) / curvature;

                if (t_partial == kInf && t_full == kInf) {
                    sol.status = QpStatus::infeasible;
                    sol.infeasibility_certificate = Vector::Zero(rows_.count());
                    sol.infeasibility_certificate(p) = 1.0;
                    for (int j = 0; j < r.size(); ++j) {
                        sol.infeasibility_certificate(active_[j]) = std::max(0.0, -r(j));
                    }
                    return finish(sol, false);
                }

                if (t_full <= t_partial) {
                    z_ -= t_full * factor_.unwhiten(w);
                    if (r.size() > 0) mu_ -= t_full * r;
                    mu_p += t_full;
                    active_.push_back(p);
                    mu_.conservativeResize(mu_.size() + 1);
                    mu_(mu_.size() - 1) = mu_p;
                    factor_.rebuild(rows_, active_);
                    added = true;
                } else {
                    if (!dependent) z_ -= t_partial * factor_.unwhiten(w);
                    mu_ -= t_partial * r;
                    mu_p += t_partial;
                    remove_active(drop);
                }
            }
        }
        return finish(sol, true);
    }

private:
    std::optional<int> trivially_infeasible_row() const {
        for (int id = 2 * n_; id < rows_.count(); ++id) {
            if (rows_.is_zero_row(id) && rows_.rhs(id) < 0.0) return id;
        }
        return std::nullopt;
    }

    void initialise() {
        active_.clear();
        if (settings_.warm_start) {
            for (int id : settings_.warm_start->constraints) {
                if (!rows_.available(id)) continue;
                if (std::find(active_.begin(), active_.end(), id) != active_.end()) continue;
                // Opposite bounds on the same variable are never active together.
                if (id < 2 * n_) {
                    const int twin = id < n_ ? id + n_ : id - n_;
                    if (std::find(active_.begin(), active_.end(), twin) != active_.end()) continue;
                }
                const Vector v = factor_.whiten(rows_.normal(id));
                Vector w;
                Vector coef;
                factor_.project(v, w, coef);
                if (w.norm() <= 1e-10 * std::max(1.0, v.norm())) continue;
                active_.push_back(id);
                factor_.rebuild(rows_, active_);
            }
            // Drop constraints until the equality-constrained optimum is dual feasible.
            while (true) {
                solve_on_active();
                if (mu_.size() == 0) break;
                Eigen::Index worst = 0;
                if (mu_.minCoeff(&worst) >= 0.0) break;
                remove_active(static_cast<int>(worst));
            }
        } else {
            factor_.rebuild(rows_, active_);
            z_ = z_free_;
            mu_.resize(0);
        }
    }

    void solve_on_active() {
        const int q = static_cast<int>(active_.size());
        if (q == 0) {
            z_ = z_free_;
            mu_.resize(0);
            return;
        }
        Vector residual(q);
        for (int j = 0; j < q; ++j) residual(j) = rows_.value(active_[j], z_free_) - rows_.rhs(active_[j]);
        mu_ = factor_.solve_normal(residual);
        z_ = z_free_ - factor_.inverse_hessian_times_normals(mu_);
    }

    void remove_active(int j) {
        active_.erase(active_.begin() + j);
        Vector kept(mu_.size() - 1);
        for (Eigen::Index i = 0, k = 0; i < mu_.size(); ++i) {
            if (i != j) kept(k++) = mu_(i);
        }
        mu_ = kept;
        factor_.rebuild(rows_, active_);
    }

    // Most violated inactive row; ties resolved towards the lowest id.
    int most_violated() const {
        int best = -1;
        double best_violation = 0.0;
        for (int id = 0; id < rows_.count(); ++id) {
            if (!rows_.available(id)) continue;
            if (std::find(active_.begin(), active_.end(), id) != active_.end()) continue;
            const double b = rows_.rhs(id);
            const double violation = rows_.value(id, z_) - b;
            if (violation > 1e-12 * (1.0 + std::abs(b)) && violation > best_violation) {
                best_violation = violation;
                best = id;
            }
        }
        return best;
    }

    void fill_duals(QpSolution& sol) const {
        sol.lower_duals = Vector::Zero(n_);
        sol.upper_duals = Vector::Zero(n_);
        sol.ineq_duals = Vector::Zero(qp_.num_inequalities());
        for (std::size_t j = 0; j < active_.size(); ++j) {
            const int id = active_[j];
            const double mu = j < static_cast<std::size_t>(mu_.size()) ? mu_(static_cast<Eigen::Index>(j)) : 0.0;
            if (id < n_) sol.lower_duals(id) = mu;
            else if (id < 2 * n_) sol.upper_duals(id - n_) = mu;
            else sol.ineq_duals(id - 2 * n_) = mu;
        }
    }

    QpSolution& finish(QpSolution& sol, bool converged) {
        if (converged) solve_on_active();  // polish on the final working set
        sol.z = z_;
        sol.iterations = iterations_;
        sol.active_set.constraints = active_;
        fill_duals(sol);
        sol.objective = objective(qp_, sol.z);
        sol.kkt_residual = kkt_residual(qp_, sol.z, sol.lower_duals, sol.upper_duals, sol.ineq_duals);
        if (converged) {
            sol.status = sol.kkt_residual <= settings_.tol_kkt ? QpStatus::optimal : QpStatus::inaccurate;
        }
        return sol;
    }

    const DenseQp& qp_;
    ConstraintRows rows_;
    ActiveFactor factor_;
    const QpSettings& settings_;
    int n_ = 0;
    int max_iterations_ = 0;
    int iterations_ = 0;
    Vector z_free_;
    Vector z_;
    Vector mu_;
    std::vector<int> active_;
};

void validate(const DenseQp& qp) {
    const Eigen::Index n = qp.hessian.rows();
    require(n > 0 && qp.hessian.cols() == n, "qp: Hessian must be square and non-empty");
    require(qp.linear.size() == n, "qp: linear term has wrong size");
    require(qp.lower.size() == n && qp.upper.size() == n, "qp: bounds have wrong size");
    require(qp.ineq_matrix.cols() == n || qp.ineq_matrix.rows() == 0, "qp: G has wrong number of columns");
    require(qp.ineq_rhs.size() == qp.ineq_matrix.rows(), "qp: g has wrong size");
    require(qp.hessian.allFinite() && qp.linear.allFinite(), "qp: Hessian and linear term must be finite");
    for (Eigen::Index i = 0; i < n; ++i) {
        require(!std::isnan(qp.lower(i)) && !std::isnan(qp.upper(i)), "qp: NaN bound");
        require(qp.lower(i) <= qp.upper(i), "qp: inconsistent bounds (lower > upper)");
    }
    const double scale = std::max(1.0, qp.hessian.cwiseAbs().maxCoeff());
    require((qp.hessian - qp.hessian.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
            "qp: Hessian is not symmetric");
}

} // namespace

std::string to_string(QpStatus status) {
    switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::max_iterations: return "max_iterations";
    case QpStatus::inaccurate: return "inaccurate";
    }
    return "unknown";
}

double objective(const DenseQp& qp, const Vector& z) {
    return 0.5 * z.dot(qp.hessian * z) + qp.linear.dot(z);
}

double kkt_residual(const DenseQp& qp, const Vector& z, const Vector& lower_duals,
                    const Vector& upper_duals, const Vector& ineq_duals) {
    Vector stationarity = qp.hessian * z + qp.linear - lower_duals + upper_duals;
    if (qp.num_inequalities() > 0) stationarity += qp.ineq_matrix.transpose() * ineq_duals;
    double res = stationarity.cwiseAbs().maxCoeff();

    auto account = [&res](double slack, double dual, bool finite) {
        res = std::max(res, -dual);
        if (!finite) {
            res = std::max(res, std::abs(dual));
            return;
        }
        res = std::max(res, -slack);
        res = std::max(res, std::abs(dual * slack));
    };
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        account(z(i) - qp.lower(i), lower_duals(i), std::isfinite(qp.lower(i)));
        account(qp.upper(i) - z(i), upper_duals(i), std::isfinite(qp.upper(i)));
    }
    for (Eigen::Index j = 0; j < qp.ineq_matrix.rows(); ++j) {
        account(qp.ineq_rhs(j) - qp.ineq_matrix.row(j).dot(z), ineq_duals(j), true);
    }
    return res;
}

QpSolution solve(const DenseQp& qp, const QpSettings& settings) {
    validate(qp);
    std::shared_ptr<const Eigen::LLT<Matrix>> factor = qp.hessian_factor;
    if (!factor || factor->matrixLLT().rows() != qp.hessian.rows()) {
        factor = std::make_shared<Eigen::LLT<Matrix>>(qp.hessian);
    }
    if (factor->info() != Eigen::Success) {
        throw NumericalError("qp: Hessian is not positive definite");
    }
    DualActiveSetSolver solver(qp, *factor, settings);
    return solver.run();
}

} // namespace refcond
