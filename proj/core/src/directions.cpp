#include "dbn/directions.hpp"

#include <cmath>

namespace dbn {

std::vector<double> guard_weights(std::span<const double> c) {
    const double floor = 1e-12 * norm_inf(c);
    std::vector<double> out(c.begin(), c.end());
    for (double& v : out)
        if (std::abs(v) < floor) v = v < 0.0 ? -floor : floor;
    return out;
}

namespace {

/// D(c)^{-1} A_r^{-1} D(c)^{-1} y.
std::vector<double> scaled_ar_solve(const StructuredHessian& h, std::span<const double> c,
                                    std::span<const double> y) {
    const std::size_t n = c.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = y[i] / c[i];
    t = h.ar_inv.apply(t);
    for (std::size_t i = 0; i < n; ++i) t[i] /= c[i];
    return t;
}

std::vector<double> structured_solve(const StructuredHessian& h, std::span<const double> grad,
                                     bool with_diag) {
    const std::size_t n = h.size();
    if (norm_inf(h.c) == 0.0) return std::vector<double>(n, 0.0);
    const auto c = guard_weights(h.c);
    LinearSolve base;
    if (with_diag) {
        // K = I + D(c)^{-1} A_r^{-1} D(s), tridiagonal.
        const auto& ainv = h.ar_inv;
        const auto& s = h.diag_part;
        TriDiagonal k(n);
        for (std::size_t i = 0; i < n; ++i) {
            k.diag[i] = 1.0 + ainv.diag[i] * s[i] / c[i];
            if (i + 1 < n) {
                k.sup[i] = ainv.sup[i] * s[i + 1] / c[i];
                k.sub[i] = ainv.sub[i] * s[i] / c[i + 1];
            }
        }
        base = [&h, c, k = std::move(k)](std::span<const double> y) {
            return tridiag_solve(k, scaled_ar_solve(h, c, y));
        };
    } else {
        base = [&h, &c](std::span<const double> y) { return scaled_ar_solve(h, c, y); };
    }
    RankOneUpdate upd{base, h.rank1, h.rank1, h.gamma};
    return sherman_morrison_solve(upd, grad);
}

}  // namespace

std::vector<double> newton_direction(const StructuredHessian& h, std::span<const double> grad) {
    return structured_solve(h, grad, true);
}

std::vector<double> gn_direction(const StructuredHessian& h, std::span<const double> grad) {
    return structured_solve(h, grad, false);
}

}  // namespace dbn
