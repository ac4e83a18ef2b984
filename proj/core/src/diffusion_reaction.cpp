#include "dbn/models.hpp"

#include <cmath>
#include <stdexcept>

namespace dbn {

ScalarField pull_back(const ScalarField& g, const CoordinateMap& map, double value_scale) {
    if (g.is_constant()) return ScalarField::constant(value_scale * g.constant_value());
    auto value = [g, map, value_scale](double t) { return value_scale * g(map.to_physical(t)); };
    if (!g.has_derivative()) return ScalarField(value);
    auto deriv = [g, map, value_scale](double t) {
        return value_scale * map.length * g.derivative_fn()(map.to_physical(t));
    };
    return ScalarField(value, deriv);
}

UnitProblem to_unit_problem(const DRProblem& prob) {
    if (!(prob.x_hi > prob.x_lo)) throw std::invalid_argument("to_unit_problem: empty interval");
    const CoordinateMap map{prob.x_lo, prob.x_hi - prob.x_lo};
    if (prob.x_lo == 0.0 && prob.x_hi == 1.0) return {prob, map};
    DRProblem out = prob;
    const double L = map.length;
    out.a = pull_back(prob.a, map, 1.0 / (L * L));
    out.r = pull_back(prob.r, map);
    out.f = pull_back(prob.f, map);
    out.x_lo = 0.0;
    out.x_hi = 1.0;
    out.features.clear();
    for (const Feature& ft : prob.features) out.features.push_back({map.to_unit(ft.x), ft.width / L});
    return {std::move(out), map};
}

double dr_energy(const ShallowReLUNet& net, const DRProblem& prob, const IntegrationPlan& plan) {
    const auto slopes = net.slopes();
    const double interior = integrate_piecewise(net, plan, [&](std::size_t k, double x) {
        const double u = net.value_on(k, x);
        return 0.5 * prob.a(x) * slopes[k] * slopes[k] + 0.5 * prob.r(x) * u * u - prob.f(x) * u;
    });
    const double miss = net.nodal_values().back() - prob.beta_bc;
    return interior + 0.5 * prob.gamma * miss * miss;
}

std::vector<double> dr_solve_linear(const DRProblem& prob, const Partition& p,
                                    const IntegrationPlan& plan) {
    const auto base = FactorizedOperator::mass_plus_stiffness(prob.a, prob.r, p, plan);
    auto d = boundary_gradient_vector(p);
    auto rhs = rhs_dr(prob.f, prob.r, prob.alpha_bc, p, plan, prob.literal_rhs);
    const double shift = prob.gamma * (prob.beta_bc - prob.alpha_bc);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += shift * d[i];
    RankOneUpdate upd{[&base](std::span<const double> y) { return base.apply_inverse(y); }, d, d,
                      prob.gamma};
    return sherman_morrison_solve(upd, rhs);
}

std::vector<double> dr_grad_b(const ShallowReLUNet& net, const DRProblem& prob,
                              const IntegrationPlan& plan) {
    const Partition& p = net.partition();
    const auto c = net.c();
    const auto slopes = net.slopes();
    const auto tails = network_tails(net, plan, [&](std::size_t k, double x) {
        return prob.r(x) * net.value_on(k, x) - prob.f(x);
    });
    const double penalty = prob.gamma * (net.nodal_values().back() - prob.beta_bc);
    std::vector<double> g(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double flux_jump = prob.a(p[j]) * (slopes[j] + 0.5 * c[j]);
        g[j] = -c[j] * (flux_jump + tails[j] + penalty);
    }
    return g;
}

StructuredHessian dr_hessian(const ShallowReLUNet& net, const DRProblem& prob,
                             const IntegrationPlan& plan, bool* used_fd) {
    const Partition& p = net.partition();
    const auto c = net.c();
    const auto slopes = net.slopes();
    const auto ub = net.breakpoint_values();
    const double fd_step = 1e-6 * p.length();
    std::vector<double> g(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double x = p[j];
        const double da = prob.a.derivative(x, fd_step, used_fd);
        g[j] = prob.r(x) * ub[j] - prob.f(x) - da * (slopes[j] + 0.5 * c[j]);
    }
    return make_structured_hessian(std::move(g), c, coefficient_matrix(prob.r, p, plan),
                                   prob.gamma, std::vector<double>(c.begin(), c.end()));
}

StructuredHessian gauss_newton_matrix(const ShallowReLUNet& net, const DRProblem& prob,
                                      const IntegrationPlan& plan) {
    const Partition& p = net.partition();
    const auto c = net.c();
    return make_structured_hessian(std::vector<double>(c.size(), 0.0), c,
                                   coefficient_matrix(prob.r, p, plan), prob.gamma,
                                   std::vector<double>(c.begin(), c.end()));
}

}  // namespace dbn
