#include "dbn/free_knot.hpp"

#include "dbn/block_newton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dbn {

FreeKnotShape build_free_knot_shape(double c0, std::span<const double> c,
                                    std::span<const double> b, double lo, double hi) {
    if (c.size() != b.size()) throw std::invalid_argument("free knot: |c| != |b|");
    FreeKnotShape s;
    s.lo = lo;
    s.hi = hi;
    double value = c0;
    double slope = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] <= lo) {
            value += c[i] * (lo - b[i]);
            slope += c[i];
        } else if (b[i] < hi) {
            s.order.push_back(i);
        }
    }
    std::stable_sort(s.order.begin(), s.order.end(),
                     [&](std::size_t x, std::size_t y) { return b[x] < b[y]; });
    s.nodes.reserve(s.order.size() + 2);
    s.nodes.push_back(lo);
    for (std::size_t i : s.order) s.nodes.push_back(b[i]);
    s.nodes.push_back(hi);
    const std::size_t m = s.nodes.size() - 1;
    s.values.resize(m + 1);
    s.slopes.resize(m);
    s.values[0] = value;
    for (std::size_t k = 0; k < m; ++k) {
        if (k > 0) slope += c[s.order[k - 1]];
        s.slopes[k] = slope;
        s.values[k + 1] = s.values[k] + slope * (s.nodes[k + 1] - s.nodes[k]);
    }
    return s;
}

double FreeKnotObjective::value(std::span<const double> x) const {
    std::vector<double> g(x.size());
    return value_and_gradient(x, g);
}

std::vector<double> pack_parameters(const ShallowReLUNet& net) {
    std::vector<double> x(net.c().begin(), net.c().end());
    const auto b = net.partition().breakpoints();
    x.insert(x.end(), b.begin(), b.end());
    return x;
}

namespace {

struct Tails {
    std::vector<double> t0;  // int_{node_m}^{hi} e
    std::vector<double> t1;  // int_{node_m}^{hi} e (x - node_m)
};

template <class E>
Tails residual_tails(const FreeKnotShape& s, const IntegrationPlan& plan, const E& e) {
    const std::size_t m = s.intervals();
    Tails t{std::vector<double>(m + 1, 0.0), std::vector<double>(m + 1, 0.0)};
    for (std::size_t k = m; k-- > 0;) {
        const double a = s.nodes[k];
        const double b = s.nodes[k + 1];
        const double g0 = plan.integrate([&](double x) { return e(k, x); }, a, b);
        const double g1 = plan.integrate([&](double x) { return e(k, x) * (x - a); }, a, b);
        t.t0[k] = g0 + t.t0[k + 1];
        t.t1[k] = g1 + t.t1[k + 1] + (b - a) * t.t0[k + 1];
    }
    return t;
}

/// Node index of neuron i inside the shape, or 0 when b_i <= lo (anchored at lo),
/// or npos when b_i >= hi.
std::vector<std::size_t> node_index(const FreeKnotShape& s, std::size_t n,
                                    std::span<const double> b) {
    constexpr auto npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> idx(n, npos);
    for (std::size_t i = 0; i < n; ++i)
        if (b[i] <= s.lo) idx[i] = 0;
    for (std::size_t m = 0; m < s.order.size(); ++m) idx[s.order[m]] = m + 1;
    return idx;
}

}  // namespace

double LSFreeKnot::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
    const std::size_t n = x.size() / 2;
    const auto c = x.first(n);
    const auto b = x.subspan(n, n);
    const FreeKnotShape s = build_free_knot_shape(c0(), c, b, prob_.x_lo, prob_.x_hi);
    double loss = 0.0;
    for (std::size_t k = 0; k < s.intervals(); ++k)
        loss += plan_.integrate(
            [&](double t) {
                const double e = s.value_on(k, t) - prob_.f(t);
                return prob_.r(t) * e * e;
            },
            s.nodes[k], s.nodes[k + 1]);
    const Tails tails = residual_tails(
        s, plan_, [&](std::size_t k, double t) { return prob_.r(t) * (s.value_on(k, t) - prob_.f(t)); });
    const auto idx = node_index(s, n, b);
    for (std::size_t i = 0; i < n; ++i) {
        if (idx[i] == static_cast<std::size_t>(-1)) {
            grad[i] = 0.0;
            grad[n + i] = 0.0;
            continue;
        }
        const std::size_t m = idx[i];
        const double start = s.nodes[m];
        grad[i] = tails.t1[m] + (start - b[i]) * tails.t0[m];
        grad[n + i] = -c[i] * tails.t0[m];
    }
    return 0.5 * loss;
}

DRFreeKnot::DRFreeKnot(DRProblem prob, IntegrationPlan plan,
                       std::optional<ScalarField> exact_derivative)
    : prob_(std::move(prob)), plan_(std::move(plan)),
      exact_derivative_(std::move(exact_derivative)), error_plan_(error_plan_for(plan_)) {}

double DRFreeKnot::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
    const std::size_t n = x.size() / 2;
    const auto c = x.first(n);
    const auto b = x.subspan(n, n);
    const FreeKnotShape s = build_free_knot_shape(c0(), c, b, prob_.x_lo, prob_.x_hi);
    const std::size_t m_int = s.intervals();
    double energy = 0.0;
    std::vector<double> flux_tail(m_int + 1, 0.0);
    for (std::size_t k = m_int; k-- > 0;) {
        const double lo = s.nodes[k];
        const double hi = s.nodes[k + 1];
        const double sk = s.slopes[k];
        const double a_int = plan_.integrate(prob_.a, lo, hi);
        energy += 0.5 * sk * sk * a_int;
        energy += plan_.integrate(
            [&](double t) {
                const double u = s.value_on(k, t);
                return 0.5 * prob_.r(t) * u * u - prob_.f(t) * u;
            },
            lo, hi);
        flux_tail[k] = flux_tail[k + 1] + sk * a_int;
    }
    const double miss = s.values.back() - prob_.beta_bc;
    energy += 0.5 * prob_.gamma * miss * miss;
    const Tails tails = residual_tails(s, plan_, [&](std::size_t k, double t) {
        return prob_.r(t) * s.value_on(k, t) - prob_.f(t);
    });
    const auto idx = node_index(s, n, b);
    for (std::size_t i = 0; i < n; ++i) {
        if (idx[i] == static_cast<std::size_t>(-1)) {
            grad[i] = 0.0;
            grad[n + i] = 0.0;
            continue;
        }
        const std::size_t m = idx[i];
        const double start = s.nodes[m];
        grad[i] = flux_tail[m] + tails.t1[m] + (start - b[i]) * tails.t0[m] +
                  prob_.gamma * miss * (prob_.x_hi - b[i]);
        double jump = 0.0;
        if (m > 0) jump = prob_.a(b[i]) * (s.slopes[m - 1] + 0.5 * c[i]);
        grad[n + i] = -c[i] * (jump + tails.t0[m] + prob_.gamma * miss);
    }
    return energy;
}

std::optional<double> DRFreeKnot::rel_error(std::span<const double> x) const {
    if (!exact_derivative_) return std::nullopt;
    const std::size_t n = x.size() / 2;
    const FreeKnotShape s =
        build_free_knot_shape(c0(), x.first(n), x.subspan(n, n), prob_.x_lo, prob_.x_hi);
    const ScalarField& du = *exact_derivative_;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < s.intervals(); ++k) {
        const double lo = s.nodes[k];
        const double hi = s.nodes[k + 1];
        num += error_plan_.integrate(
            [&](double t) {
                const double e = du(t) - s.slopes[k];
                return e * e;
            },
            lo, hi);
        den += error_plan_.integrate([&](double t) { return du(t) * du(t); }, lo, hi);
    }
    if (!(den > 0.0)) return std::nullopt;
    return std::sqrt(num / den);
}

}  // namespace dbn
