#include "dbn/assembly.hpp"

#include "dbn/errors.hpp"

namespace dbn {

TriDiagonal assemble_T_mass(const ScalarField& r, const Partition& p,
                            const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    const auto h = p.neuron_gaps();
    const auto s0 = moments(r, p, 0, plan);
    const auto s1 = moments(r, p, 1, plan);
    const auto s2 = moments(r, p, 2, plan);
    auto B = [&](std::size_t i) { return s1[i] / h[i]; };
    auto C = [&](std::size_t i) { return s2[i] / (h[i] * h[i]); };
    TriDiagonal t(n);
    for (std::size_t j = 0; j < n; ++j) {
        t.diag[j] = C(j);
        if (j + 1 < n) {
            t.diag[j] += s0[j + 1] - 2.0 * B(j + 1) + C(j + 1);
            t.sup[j] = B(j + 1) - C(j + 1);
            t.sub[j] = t.sup[j];
        }
    }
    return t;
}

TriDiagonal assemble_T_stiff(const ScalarField& a, const Partition& p,
                             const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    const auto h = p.neuron_gaps();
    const auto s0 = moments(a, p, 0, plan);
    TriDiagonal t(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double e = s0[j] / (h[j] * h[j]);
        t.diag[j] += e;
        if (j + 1 < n) {
            const double e1 = s0[j + 1] / (h[j + 1] * h[j + 1]);
            t.diag[j] += e1;
            t.sup[j] = -e1;
            t.sub[j] = -e1;
        }
    }
    return t;
}

FactorizedOperator FactorizedOperator::mass(const ScalarField& r, const Partition& p,
                                            const IntegrationPlan& plan) {
    return FactorizedOperator(p, assemble_T_mass(r, p, plan), OperatorKind::mass);
}

FactorizedOperator FactorizedOperator::stiffness(const ScalarField& a, const Partition& p,
                                                 const IntegrationPlan& plan) {
    return FactorizedOperator(p, assemble_T_stiff(a, p, plan), OperatorKind::stiffness);
}

FactorizedOperator FactorizedOperator::mass_plus_stiffness(const ScalarField& a,
                                                           const ScalarField& r,
                                                           const Partition& p,
                                                           const IntegrationPlan& plan) {
    return FactorizedOperator(p, assemble_T_stiff(a, p, plan) + assemble_T_mass(r, p, plan),
                              OperatorKind::mass_plus_stiffness);
}

std::vector<double> FactorizedOperator::apply(std::span<const double> x) const {
    const auto y = t_.apply(q_solve(p_, x));
    return qt_solve(p_, y);
}

std::vector<double> FactorizedOperator::apply_inverse(std::span<const double> y) const {
    const auto z = tridiag_solve(t_, qt_apply(p_, y));
    return q_apply(p_, z);
}

AlgebraicMassInverse::AlgebraicMassInverse(TriDiagonal m1inv, TriDiagonal m2inv)
    : m1inv_(std::move(m1inv)), m2inv_(std::move(m2inv)), middle_(m1inv_ + m2inv_) {}

std::vector<double> AlgebraicMassInverse::apply_inverse(std::span<const double> y) const {
    const auto z = tridiag_solve(middle_, m1inv_.apply(y));
    return m2inv_.apply(z);
}

AlgebraicMassInverse assemble_mass_algebraic(const ScalarField& r, const Partition& p,
                                             const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    const double hi = p.x_hi();
    auto beta1 = first_moment_tails([&](double x) { return r(x) * (x - hi); }, p, plan);
    auto beta2 = first_moment_tails(r, p, plan);
    std::vector<double> alpha2(n);
    for (std::size_t k = 0; k < n; ++k) alpha2[k] = hi - p[k];
    AlphaBetaMatrix m1(std::vector<double>(n, 1.0), std::move(beta1));
    AlphaBetaMatrix m2(std::move(alpha2), std::move(beta2));
    return AlgebraicMassInverse(alphabeta_inverse(m1), alphabeta_inverse(m2));
}

AlphaBetaMatrix coefficient_matrix(const ScalarField& r, const Partition& p,
                                   const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    const auto s0 = moments(r, p, 0, plan);
    std::vector<double> beta(n);
    double acc = 0.0;
    for (std::size_t i = n; i-- > 0;) beta[i] = (acc += s0[i]);
    return AlphaBetaMatrix(std::vector<double>(n, 1.0), std::move(beta));
}

std::vector<double> rhs_ls(const ScalarField& f, const ScalarField& r, const Partition& p,
                           const IntegrationPlan& plan) {
    const double f0 = f(p.x_lo());
    return first_moment_tails([&](double x) { return r(x) * (f(x) - f0); }, p, plan);
}

std::vector<double> rhs_dr(const ScalarField& f, const ScalarField& r, double alpha_bc,
                           const Partition& p, const IntegrationPlan& plan, bool literal) {
    if (literal)
        return first_moment_tails([&](double x) { return f(x) - alpha_bc; }, p, plan);
    return first_moment_tails([&](double x) { return f(x) - alpha_bc * r(x); }, p, plan);
}

std::vector<double> boundary_gradient_vector(const Partition& p) {
    std::vector<double> d(p.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = p.x_hi() - p[i];
    return d;
}

}  // namespace dbn
