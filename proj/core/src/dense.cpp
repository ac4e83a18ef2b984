#include "dbn/dense.hpp"

#include <cmath>

namespace dbn {

namespace {

/// int_{b_j}^{x_hi} w(x) (x - b_j)^k dx over the whole tail at once; the
/// integrand is smooth there, so no breakpoint splitting is needed.
double shifted_tail(const ScalarField& w, double bj, double hi, int k,
                    const IntegrationPlan& plan) {
    return plan.integrate([&](double x) { return w(x) * std::pow(x - bj, k); }, bj, hi);
}

}  // namespace

Eigen::MatrixXd dense_mass(const ScalarField& r, const Partition& p, const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    Eigen::MatrixXd m(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const double bj = p[j];
        const double t1 = shifted_tail(r, bj, p.x_hi(), 1, plan);
        const double t2 = shifted_tail(r, bj, p.x_hi(), 2, plan);
        for (std::size_t i = 0; i <= j; ++i) {
            m(i, j) = t2 + (bj - p[i]) * t1;
            m(j, i) = m(i, j);
        }
    }
    return m;
}

Eigen::MatrixXd dense_stiffness(const ScalarField& a, const Partition& p,
                                const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    Eigen::VectorXd t(n);
    for (std::size_t j = 0; j < n; ++j) t[j] = shifted_tail(a, p[j], p.x_hi(), 0, plan);
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = t[std::max(i, j)];
    return m;
}

Eigen::MatrixXd to_dense(const TriDiagonal& t) {
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = t.diag[i];
        if (i + 1 < n) {
            m(i, i + 1) = t.sup[i];
            m(i + 1, i) = t.sub[i];
        }
    }
    return m;
}

Eigen::MatrixXd to_dense(const AlphaBetaMatrix& ab) {
    const auto n = static_cast<Eigen::Index>(ab.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = ab.entry(i, j);
    return m;
}

Eigen::MatrixXd to_dense(const StructuredHessian& h) {
    const auto n = static_cast<Eigen::Index>(h.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = h.c[i] * h.ar_beta[std::max(i, j)] * h.c[j];
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) += h.diag_part[i] * h.c[i];
    if (h.gamma != 0.0) {
        const Eigen::Map<const Eigen::VectorXd> v(h.rank1.data(), n);
        m += h.gamma * v * v.transpose();
    }
    return m;
}

Eigen::MatrixXd dense_Q(const Partition& p) {
    const auto n = static_cast<Eigen::Index>(p.size());
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 1; i < n; ++i) g(i, i - 1) = -1.0;
    Eigen::VectorXd hinv(n);
    const auto h = p.neuron_gaps();
    for (Eigen::Index i = 0; i < n; ++i) hinv[i] = 1.0 / h[i];
    return g * hinv.asDiagonal() * g;
}

}  // namespace dbn
