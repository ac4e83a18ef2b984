#include "dbn/bfgs.hpp"

#include "dbn/structured_linalg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace dbn {

namespace {

struct Point {
    double alpha = 0.0;
    double f = 0.0;
    double d = 0.0;
    std::vector<double> g;
};

class LineFunction {
public:
    LineFunction(const ValueAndGradient& fg, std::span<const double> x, std::span<const double> p)
        : fg_(fg), x_(x), p_(p), trial_(x.size()) {}

    Point eval(double alpha) {
        for (std::size_t i = 0; i < x_.size(); ++i) trial_[i] = x_[i] + alpha * p_[i];
        Point pt;
        pt.alpha = alpha;
        pt.g.resize(x_.size());
        pt.f = fg_(trial_, pt.g);
        pt.d = dot(pt.g, p_);
        return pt;
    }

private:
    const ValueAndGradient& fg_;
    std::span<const double> x_;
    std::span<const double> p_;
    std::vector<double> trial_;
};

double cubic_minimizer(const Point& a, const Point& b) {
    const double d1 = a.d + b.d - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.d * b.d;
    if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    return b.alpha - (b.alpha - a.alpha) * (b.d + d2 - d1) / (b.d - a.d + 2.0 * d2);
}

/// Strong Wolfe line search; returns false when no acceptable step is found.
bool wolfe_search(LineFunction& phi, const Point& p0, double alpha1, const BfgsConfig& cfg,
                  Point& out) {
    auto sufficient = [&](const Point& pt) { return pt.f <= p0.f + cfg.c1 * pt.alpha * p0.d; };
    auto curvature = [&](const Point& pt) { return std::abs(pt.d) <= -cfg.c2 * p0.d; };

    auto zoom = [&](Point lo, Point hi) {
        for (int j = 0; j < cfg.max_line_search; ++j) {
            const double a_min = std::min(lo.alpha, hi.alpha);
            const double a_max = std::max(lo.alpha, hi.alpha);
            const double width = a_max - a_min;
            double a = cubic_minimizer(lo, hi);
            if (!std::isfinite(a) || a < a_min + 0.1 * width || a > a_max - 0.1 * width)
                a = 0.5 * (lo.alpha + hi.alpha);
            Point pt = phi.eval(a);
            if (!std::isfinite(pt.f) || !sufficient(pt) || pt.f >= lo.f) {
                hi = std::move(pt);
            } else {
                if (curvature(pt)) {
                    out = std::move(pt);
                    return true;
                }
                if (pt.d * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = std::move(pt);
            }
            if (width < 1e-14 * std::max(1.0, a_max)) break;
        }
        if (lo.alpha > 0.0 && sufficient(lo)) {
            out = std::move(lo);
            return true;
        }
        return false;
    };

    Point prev = p0;
    double alpha = alpha1;
    for (int i = 0; i < cfg.max_line_search; ++i) {
        Point pt = phi.eval(alpha);
        if (!std::isfinite(pt.f) || !sufficient(pt) || (i > 0 && pt.f >= prev.f))
            return zoom(prev, pt);
        if (curvature(pt)) {
            out = std::move(pt);
            return true;
        }
        if (pt.d >= 0.0) return zoom(pt, prev);
        prev = std::move(pt);
        alpha *= 2.0;
    }
    return false;
}

}  // namespace

BfgsResult minimize_bfgs(const ValueAndGradient& fg, std::vector<double> x0, const BfgsConfig& cfg,
                         const std::function<void(std::span<const double>, IterRecord&)>& observer) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    };
    const std::size_t n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    std::vector<double> g(n);
    double f = fg(res.x, g);
    // Row-major inverse Hessian approximation.
    std::vector<double> h(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
    double f_old_old = f + 0.5 * norm2(g);

    auto record = [&](int iter, double eta) {
        IterRecord rec;
        rec.iter = iter;
        rec.J = f;
        rec.e_n = std::numeric_limits<double>::quiet_NaN();
        rec.grad_norm = norm2(g);
        rec.eta = eta;
        rec.n = n / 2;
        rec.wall_ms = elapsed();
        if (observer) observer(res.x, rec);
        res.trace.records.push_back(rec);
    };
    record(0, 0.0);
    res.trace.status = "max_iters";

    std::vector<double> p(n), s(n), y(n), hy(n);
    for (int k = 1; k <= cfg.max_iters; ++k) {
        if (norm_inf(g) <= cfg.gtol) {
            res.trace.status = "converged";
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc -= h[i * n + j] * g[j];
            p[i] = acc;
        }
        double d0 = dot(g, p);
        if (!(d0 < 0.0)) {
            // Lost positive definiteness: restart from steepest descent.
            std::fill(h.begin(), h.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                h[i * n + i] = 1.0;
                p[i] = -g[i];
            }
            d0 = dot(g, p);
        }
        LineFunction phi(fg, res.x, p);
        Point p0{0.0, f, d0, g};
        double alpha1 = 1.0;
        if (d0 != 0.0) alpha1 = std::min(1.0, 1.01 * 2.0 * (f - f_old_old) / d0);
        if (!(alpha1 > 0.0)) alpha1 = 1.0;
        Point next;
        if (!wolfe_search(phi, p0, alpha1, cfg, next)) {
            res.trace.status = "line_search_failed";
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = next.alpha * p[i];
            y[i] = next.g[i] - g[i];
            res.x[i] += s[i];
        }
        f_old_old = f;
        f = next.f;
        g = std::move(next.g);

        const double ys = dot(y, s);
        const double rho = ys != 0.0 ? 1.0 / ys : 1000.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += h[i * n + j] * y[j];
            hy[i] = acc;
        }
        const double yhy = dot(y, hy);
        const double ss_coef = rho * rho * yhy + rho;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + ss_coef * s[i] * s[j];
        record(k, next.alpha);
    }
    return res;
}

BfgsResult run_bfgs_baseline(const FreeKnotObjective& obj, const ShallowReLUNet& net0,
                             const BfgsConfig& cfg) {
    // The anchored breakpoint stays at x_lo: a zero gradient entry keeps BFGS off it.
    const std::size_t pinned = net0.partition().anchored() ? net0.size() : 0;
    auto fg = [&obj, pinned](std::span<const double> x, std::span<double> g) {
        const double j = obj.value_and_gradient(x, g);
        if (pinned > 0) g[pinned] = 0.0;
        return j;
    };
    auto observer = [&obj](std::span<const double> x, IterRecord& rec) {
        if (auto e = obj.rel_error(x)) rec.e_n = *e;
    };
    return minimize_bfgs(fg, pack_parameters(net0), cfg, observer);
}

}  // namespace dbn
