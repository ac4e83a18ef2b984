#include "dbn/models.hpp"

#include <cmath>
#include <stdexcept>

namespace dbn {

std::vector<double> StructuredHessian::apply(std::span<const double> x) const {
    const std::size_t n = size();
    // A_r y with y = D(c) x via prefix/suffix sums.
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = c[i] * x[i];
    std::vector<double> ay(n);
    double prefix = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        prefix += y[i];
        ay[i] = ar_beta[i] * prefix;
    }
    double suffix = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        ay[i] += suffix;
        suffix += ar_beta[i] * y[i];
    }
    const double proj = gamma != 0.0 ? gamma * dot(rank1, x) : 0.0;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = diag_part[i] * c[i] * x[i] + c[i] * ay[i];
        if (gamma != 0.0) out[i] += proj * rank1[i];
    }
    return out;
}

StructuredHessian make_structured_hessian(std::vector<double> diag_part, std::span<const double> c,
                                          const AlphaBetaMatrix& ar, double gamma,
                                          std::vector<double> rank1) {
    StructuredHessian h;
    h.diag_part = std::move(diag_part);
    h.c.assign(c.begin(), c.end());
    h.ar_beta.assign(ar.beta().begin(), ar.beta().end());
    h.ar_inv = alphabeta_inverse(ar);
    h.gamma = gamma;
    h.rank1 = std::move(rank1);
    return h;
}

StructuredHessian trailing_block(const StructuredHessian& h, std::size_t first) {
    if (first == 0) return h;
    auto tail = [first](const std::vector<double>& v) {
        return v.empty() ? v : std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first), v.end());
    };
    const std::vector<double> beta = tail(h.ar_beta);
    return make_structured_hessian(tail(h.diag_part), tail(h.c),
                                   AlphaBetaMatrix(std::vector<double>(beta.size(), 1.0), beta),
                                   h.gamma, tail(h.rank1));
}

double ls_loss(const ShallowReLUNet& net, const LSProblem& prob, const IntegrationPlan& plan) {
    return 0.5 * integrate_piecewise(net, plan, [&](std::size_t k, double x) {
               const double e = net.value_on(k, x) - prob.f(x);
               return prob.r(x) * e * e;
           });
}

std::vector<double> ls_solve_linear(const LSProblem& prob, const Partition& p,
                                    const IntegrationPlan& plan) {
    const auto rhs = rhs_ls(prob.f, prob.r, p, plan);
    return FactorizedOperator::mass(prob.r, p, plan).apply_inverse(rhs);
}

std::vector<double> ls_grad_b(const ShallowReLUNet& net, const LSProblem& prob,
                              const IntegrationPlan& plan) {
    const auto tails = network_tails(net, plan, [&](std::size_t k, double x) {
        return prob.r(x) * (net.value_on(k, x) - prob.f(x));
    });
    const auto c = net.c();
    std::vector<double> g(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) g[j] = -c[j] * tails[j];
    return g;
}

StructuredHessian ls_hessian(const ShallowReLUNet& net, const LSProblem& prob,
                             const IntegrationPlan& plan) {
    const Partition& p = net.partition();
    const auto ub = net.breakpoint_values();
    std::vector<double> w(p.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = prob.r(p[j]) * (ub[j] - prob.f(p[j]));
    return make_structured_hessian(std::move(w), net.c(), coefficient_matrix(prob.r, p, plan), 0.0,
                                   {});
}

StructuredHessian gauss_newton_matrix(const ShallowReLUNet& net, const LSProblem& prob,
                                      const IntegrationPlan& plan) {
    const Partition& p = net.partition();
    return make_structured_hessian(std::vector<double>(p.size(), 0.0), net.c(),
                                   coefficient_matrix(prob.r, p, plan), 0.0, {});
}

double h1_rel_error(const ShallowReLUNet& net, const ScalarField& du_exact,
                    const IntegrationPlan& plan) {
    double num = 0.0;
    double den = 0.0;
    const Partition& p = net.partition();
    const auto slopes = net.slopes();
    for (std::size_t k = 0; k <= p.size(); ++k) {
        const double lo = p.node(k);
        const double hi = p.node_right(k);
        num += plan.integrate(
            [&](double x) {
                const double e = du_exact(x) - slopes[k];
                return e * e;
            },
            lo, hi);
        den += plan.integrate([&](double x) { return du_exact(x) * du_exact(x); }, lo, hi);
    }
    if (!(den > 0.0)) throw std::domain_error("h1_rel_error: exact solution has zero seminorm");
    return std::sqrt(num / den);
}

double l2_rel_error(const ShallowReLUNet& net, const ScalarField& u_exact,
                    const IntegrationPlan& plan) {
    double num = 0.0;
    double den = 0.0;
    const Partition& p = net.partition();
    for (std::size_t k = 0; k <= p.size(); ++k) {
        const double lo = p.node(k);
        const double hi = p.node_right(k);
        num += plan.integrate(
            [&](double x) {
                const double e = u_exact(x) - net.value_on(k, x);
                return e * e;
            },
            lo, hi);
        den += plan.integrate([&](double x) { return u_exact(x) * u_exact(x); }, lo, hi);
    }
    if (!(den > 0.0)) throw std::domain_error("l2_rel_error: exact solution is zero");
    return std::sqrt(num / den);
}

}  // namespace dbn
