#pragma once

#include "dbn/partition.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dbn {

/// Gauss-Legendre rule on the reference interval [-1, 1].
struct QuadratureRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    /// Nodes and weights by Newton iteration on P_order; exact for degree <= 2*order-1.
    static QuadratureRule gauss_legendre(int order);
};

/// A real coefficient function with an optional analytic derivative.
class ScalarField {
public:
    ScalarField() : ScalarField(constant(0.0)) {}
    explicit ScalarField(std::function<double(double)> value,
                         std::function<double(double)> derivative = {})
        : value_(std::move(value)), derivative_(std::move(derivative)) {}

    static ScalarField constant(double v) {
        ScalarField f([v](double) { return v; }, [](double) { return 0.0; });
        f.is_constant_ = true;
        f.constant_value_ = v;
        return f;
    }

    double operator()(double x) const { return is_constant_ ? constant_value_ : value_(x); }

    bool has_derivative() const noexcept { return static_cast<bool>(derivative_); }
    bool is_constant() const noexcept { return is_constant_; }
    double constant_value() const noexcept { return constant_value_; }

    /// Analytic derivative when available, otherwise a central difference with
    /// the given step; `used_fd` is set when the fallback was taken.
    double derivative(double x, double fd_step, bool* used_fd = nullptr) const {
        if (derivative_) return derivative_(x);
        if (used_fd) *used_fd = true;
        return (value_(x + fd_step) - value_(x - fd_step)) / (2.0 * fd_step);
    }

    const std::function<double(double)>& value_fn() const noexcept { return value_; }
    const std::function<double(double)>& derivative_fn() const noexcept { return derivative_; }

private:
    std::function<double(double)> value_;
    std::function<double(double)> derivative_;
    bool is_constant_ = false;
    double constant_value_ = 0.0;
};

/// A location where data or an exact solution varies on a short length scale.
struct Feature {
    double x = 0.0;
    double width = 0.0;
};

/// Composite Gauss-Legendre integration with fixed extra split points.
///
/// Every integral over [lo, hi] is cut at the split points that fall strictly
/// inside it, and each resulting piece is divided into `panels` equal panels.
/// Split points never depend on the breakpoints, so integrals stay smooth in b.
class IntegrationPlan {
public:
    IntegrationPlan() : IntegrationPlan(QuadratureRule::gauss_legendre(5)) {}
    explicit IntegrationPlan(QuadratureRule rule, std::vector<double> splits = {},
                             int panels = 1);

    /// Graded split points x +- width * 2^j (j >= -2) around every feature,
    /// clipped to (x_lo, x_hi).
    static IntegrationPlan with_features(QuadratureRule rule, std::span<const Feature> features,
                                         double x_lo, double x_hi, int panels = 1);

    /// Same splits, `factor` times more panels and at least `min_order` nodes.
    IntegrationPlan refined(int factor, int min_order) const;

    const QuadratureRule& rule() const noexcept { return rule_; }
    std::span<const double> splits() const noexcept { return splits_; }
    int panels() const noexcept { return panels_; }

    template <class F>
    double integrate(const F& g, double lo, double hi) const {
        if (!(hi > lo)) return 0.0;
        auto first = std::upper_bound(splits_.begin(), splits_.end(), lo);
        double total = 0.0;
        double a = lo;
        for (auto it = first; it != splits_.end() && *it < hi; ++it) {
            total += integrate_pieces(g, a, *it);
            a = *it;
        }
        return total + integrate_pieces(g, a, hi);
    }

private:
    template <class F>
    double integrate_pieces(const F& g, double lo, double hi) const {
        const double step = (hi - lo) / panels_;
        double total = 0.0;
        for (int p = 0; p < panels_; ++p) {
            const double a = lo + p * step;
            const double mid = a + 0.5 * step;
            const double half = 0.5 * step;
            double s = 0.0;
            for (std::size_t q = 0; q < rule_.nodes.size(); ++q)
                s += rule_.weights[q] * g(mid + half * rule_.nodes[q]);
            total += half * s;
        }
        return total;
    }

    QuadratureRule rule_;
    std::vector<double> splits_;
    int panels_ = 1;
};

/// Gauss-Legendre approximation of the integral of g over [lo, hi] using
/// `panels` uniform panels.
double integrate(const ScalarField& g, double lo, double hi, const QuadratureRule& rule,
                 int panels = 1);

/// s_i^k = int_{b_i}^{b_{i+1}} r (x - b_i)^k dx for i = 1..n (b_{n+1} = x_hi).
std::vector<double> moments(const ScalarField& r, const Partition& p, int k,
                            const IntegrationPlan& plan);

/// Per-subinterval integrals of g over I_0..I_n (n+1 entries, I_0 = [x_lo, b_1]).
template <class F>
std::vector<double> interval_integrals(const F& g, const Partition& p,
                                       const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    std::vector<double> out(n + 1);
    for (std::size_t k = 0; k <= n; ++k) out[k] = plan.integrate(g, p.node(k), p.node_right(k));
    return out;
}

/// v_j = int_{b_j}^{x_hi} g dx for j = 1..n, as suffix sums of per-interval pieces.
template <class F>
std::vector<double> tail_integrals(const F& g, const Partition& p, const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    std::vector<double> out(n);
    double acc = 0.0;
    for (std::size_t j = n; j-- > 0;) {
        acc += plan.integrate(g, p[j], p.node_right(j + 1));
        out[j] = acc;
    }
    return out;
}

/// v_j = int_{b_j}^{x_hi} g(x) (x - b_j) dx for j = 1..n.
///
/// Uses v_j = G1_j + v_{j+1} + h_j T_{j+1}, with G1_j the first local moment
/// on [b_j, b_{j+1}] and T the zeroth-moment tail, so no large terms cancel.
template <class F>
std::vector<double> first_moment_tails(const F& g, const Partition& p,
                                       const IntegrationPlan& plan) {
    const std::size_t n = p.size();
    std::vector<double> out(n);
    double tail0 = 0.0;
    double tail1 = 0.0;
    for (std::size_t j = n; j-- > 0;) {
        const double lo = p[j];
        const double hi = p.node_right(j + 1);
        const double g0 = plan.integrate(g, lo, hi);
        const double g1 = plan.integrate([&](double x) { return g(x) * (x - lo); }, lo, hi);
        tail1 = g1 + tail1 + (hi - lo) * tail0;
        tail0 += g0;
        out[j] = tail1;
    }
    return out;
}

}  // namespace dbn
