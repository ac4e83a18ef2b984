#pragma once

#include "dbn/partition.hpp"
#include "dbn/quadrature.hpp"

#include <span>
#include <vector>

namespace dbn {

/// u_n(x) = c0 + sum_i c_i relu(x - b_i) on [x_lo, x_hi].
///
/// Nodal values and per-interval slopes are cached at construction, so
/// point evaluation is a binary search and breakpoint evaluation is O(n).
class ShallowReLUNet {
public:
    ShallowReLUNet(double c0, std::vector<double> c, Partition p);

    /// Zero weights on a uniform partition.
    static ShallowReLUNet uniform(double c0, std::size_t n, double x_lo, double x_hi);

    double c0() const noexcept { return c0_; }
    std::span<const double> c() const noexcept { return c_; }
    const Partition& partition() const noexcept { return p_; }
    std::size_t size() const noexcept { return c_.size(); }

    ShallowReLUNet with_weights(std::vector<double> c) const;
    ShallowReLUNet with_partition(Partition p) const;

    /// Value at x (right-limit convention at breakpoints; continuous anyway).
    double operator()(double x) const;
    /// Derivative at x, right limit at breakpoints.
    double derivative(double x) const;

    /// u_n at the n+2 nodes x_lo, b_1..b_n, x_hi.
    std::span<const double> nodal_values() const noexcept { return values_; }
    /// u_n' on I_0..I_n (n+1 entries, slope 0 on I_0).
    std::span<const double> slopes() const noexcept { return slopes_; }
    /// u_n(b_j), j = 1..n.
    std::vector<double> breakpoint_values() const;

    double value_on(std::size_t k, double x) const {
        return values_[k] + slopes_[k] * (x - p_.node(k));
    }

private:
    void rebuild();
    std::size_t interval_of(double x) const;

    double c0_;
    std::vector<double> c_;
    Partition p_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

/// Sum over subintervals I_0..I_n of int_{I_k} g(k, x) dx, where g may use the
/// local linear form of the network on I_k.
template <class F>
double integrate_piecewise(const ShallowReLUNet& net, const IntegrationPlan& plan, const F& g) {
    const Partition& p = net.partition();
    double total = 0.0;
    for (std::size_t k = 0; k <= p.size(); ++k)
        total += plan.integrate([&](double x) { return g(k, x); }, p.node(k), p.node_right(k));
    return total;
}

/// Tails int_{b_j}^{x_hi} g(k, x) dx for j = 1..n, where g may use the local
/// form of the network on I_k; accumulated as suffix sums.
template <class F>
std::vector<double> network_tails(const ShallowReLUNet& net, const IntegrationPlan& plan,
                                  const F& g) {
    const Partition& p = net.partition();
    const std::size_t n = p.size();
    std::vector<double> out(n);
    double acc = 0.0;
    for (std::size_t k = n; k >= 1; --k) {
        acc += plan.integrate([&](double x) { return g(k, x); }, p.node(k), p.node_right(k));
        out[k - 1] = acc;
    }
    return out;
}

}  // namespace dbn
