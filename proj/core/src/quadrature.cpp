#include "dbn/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dbn {

QuadratureRule QuadratureRule::gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (order == 1) p0 = 1.0;
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    return rule;
}

IntegrationPlan::IntegrationPlan(QuadratureRule rule, std::vector<double> splits, int panels)
    : rule_(std::move(rule)), splits_(std::move(splits)), panels_(panels) {
    if (panels_ < 1) throw std::invalid_argument("IntegrationPlan: panels must be positive");
    std::sort(splits_.begin(), splits_.end());
    splits_.erase(std::unique(splits_.begin(), splits_.end()), splits_.end());
}

IntegrationPlan IntegrationPlan::with_features(QuadratureRule rule,
                                               std::span<const Feature> features, double x_lo,
                                               double x_hi, int panels) {
    std::vector<double> splits;
    auto add = [&](double x) {
        if (x > x_lo && x < x_hi) splits.push_back(x);
    };
    const double span = x_hi - x_lo;
    for (const Feature& f : features) {
        add(f.x);
        if (!(f.width > 0.0)) continue;
        for (double d = 0.25 * f.width; d < 2.0 * span; d *= 2.0) {
            add(f.x - d);
            add(f.x + d);
        }
    }
    return IntegrationPlan(std::move(rule), std::move(splits), panels);
}

IntegrationPlan IntegrationPlan::refined(int factor, int min_order) const {
    QuadratureRule r = rule_.order >= min_order ? rule_ : QuadratureRule::gauss_legendre(min_order);
    return IntegrationPlan(std::move(r), splits_, panels_ * factor);
}

double integrate(const ScalarField& g, double lo, double hi, const QuadratureRule& rule,
                 int panels) {
    return IntegrationPlan(rule, {}, panels).integrate(g, lo, hi);
}

std::vector<double> moments(const ScalarField& r, const Partition& p, int k,
                            const IntegrationPlan& plan) {
    if (k < 0 || k > 2) throw std::invalid_argument("moments: k must be 0, 1 or 2");
    const std::size_t n = p.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = p[i];
        const double hi = p.node_right(i + 1);
        if (r.is_constant()) {
            const double h = hi - lo;
            const double hk1 = k == 0 ? h : (k == 1 ? h * h : h * h * h);
            out[i] = r.constant_value() * hk1 / (k + 1);
            continue;
        }
        switch (k) {
            case 0: out[i] = plan.integrate(r, lo, hi); break;
            case 1: out[i] = plan.integrate([&](double x) { return r(x) * (x - lo); }, lo, hi); break;
            default:
                out[i] = plan.integrate(
                    [&](double x) { return r(x) * (x - lo) * (x - lo); }, lo, hi);
        }
    }
    return out;
}

}  // namespace dbn
