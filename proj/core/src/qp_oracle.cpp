#include "refcond/qp_oracle.hpp"

#include <cmath>
#include <vector>

namespace refcond {

std::optional<Vector> enumerate_box_qp(const DenseQp& qp, double tol) {
    const int n = qp.num_variables();
    require(n > 0 && n <= 12, "enumerate_box_qp: supports 1..12 variables");
    require(qp.num_inequalities() == 0, "enumerate_box_qp: box constraints only");

    std::vector<int> state(n, 0);  // 0 free, 1 lower, 2 upper
    long long total = 1;
    for (int i = 0; i < n; ++i) total *= 3;

    std::optional<Vector> best;
    double best_objective = 0.0;
    for (long long code = 0; code < total; ++code) {
        long long c = code;
        bool valid = true;
        for (int i = 0; i < n; ++i) {
            state[i] = static_cast<int>(c % 3);
            c /= 3;
            if (state[i] == 1 && !std::isfinite(qp.lower(i))) valid = false;
            if (state[i] == 2 && !std::isfinite(qp.upper(i))) valid = false;
        }
        if (!valid) continue;

        Vector z = Vector::Zero(n);
        std::vector<int> free_idx;
        for (int i = 0; i < n; ++i) {
            if (state[i] == 1) z(i) = qp.lower(i);
            else if (state[i] == 2) z(i) = qp.upper(i);
            else free_idx.push_back(i);
        }
        const int nf = static_cast<int>(free_idx.size());
        if (nf > 0) {
            Matrix hff(nf, nf);
            Vector rhs(nf);
            for (int a = 0; a < nf; ++a) {
                rhs(a) = -qp.linear(free_idx[a]);
                for (int i = 0; i < n; ++i) {
                    if (state[i] != 0) rhs(a) -= qp.hessian(free_idx[a], i) * z(i);
                }
                for (int b = 0; b < nf; ++b) hff(a, b) = qp.hessian(free_idx[a], free_idx[b]);
            }
            const Vector zf = hff.ldlt().solve(rhs);
            for (int a = 0; a < nf; ++a) z(free_idx[a]) = zf(a);
        }

        // Gradient g = Hz + f; fixed-at-lower needs g >= 0, fixed-at-upper needs g <= 0.
        const Vector grad = qp.hessian * z + qp.linear;
        bool kkt = true;
        for (int i = 0; i < n && kkt; ++i) {
            const double scale = 1.0 + std::abs(z(i));
            if (state[i] == 0) {
                kkt = z(i) >= qp.lower(i) - tol * scale && z(i) <= qp.upper(i) + tol * scale;
            } else if (state[i] == 1) {
                kkt = grad(i) >= -tol;
            } else {
                kkt = grad(i) <= tol;
            }
        }
        if (!kkt) continue;
        const double obj = objective(qp, z);
        if (!best || obj < best_objective) {
            best = z;
            best_objective = obj;
        }
    }
    return best;
}

} // namespace refcond
