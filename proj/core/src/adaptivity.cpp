#include "dbn/adaptivity.hpp"

#include "dbn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dbn {

namespace {

// Ends of the non-empty subintervals (I_0 is skipped when anchored).
std::vector<double> network_nodes(const ShallowReLUNet& net) {
    const Partition& p = net.partition();
    std::vector<double> nodes;
    nodes.reserve(p.size() + 2);
    for (std::size_t k = p.first_free(); k <= p.size(); ++k) nodes.push_back(p.node(k));
    nodes.push_back(p.x_hi());
    return nodes;
}

std::span<const double> cell_slopes(const ShallowReLUNet& net) {
    return net.slopes().subspan(net.partition().first_free());
}

}  // namespace

RecoveredFlux recover_from_interval_fluxes(std::span<const double> nodes,
                                           std::span<const double> q) {
    const std::size_t m = q.size();
    RecoveredFlux g;
    g.nodes.assign(nodes.begin(), nodes.end());
    g.values.resize(m + 1);
    g.values[0] = q[0];
    g.values[m] = q[m - 1];
    for (std::size_t k = 1; k < m; ++k) {
        const double hl = nodes[k] - nodes[k - 1];
        const double hr = nodes[k + 1] - nodes[k];
        g.values[k] = (hl * q[k] + hr * q[k - 1]) / (hl + hr);
    }
    return g;
}

RecoveredFlux recover_flux(const ShallowReLUNet& net, const DRProblem& prob,
                           const IntegrationPlan& plan, int power) {
    const auto nodes = network_nodes(net);
    const auto slopes = cell_slopes(net);
    std::vector<double> q(slopes.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double lo = nodes[k];
        const double hi = nodes[k + 1];
        double mean_a;
        if (prob.a.is_constant()) {
            mean_a = std::pow(prob.a.constant_value(), power);
        } else {
            mean_a = plan.integrate([&](double x) { return std::pow(prob.a(x), power); }, lo, hi) /
                     (hi - lo);
        }
        q[k] = slopes[k] * mean_a;
    }
    return recover_from_interval_fluxes(nodes, q);
}

IndicatorReport local_indicators(const ShallowReLUNet& net, const DRProblem& prob,
                                 const IntegrationPlan& plan, ResidualForm form) {
    const auto slopes = cell_slopes(net);
    const std::size_t off = net.partition().first_free();
    const RecoveredFlux g1 = recover_flux(net, prob, plan, 1);
    const bool published = form == ResidualForm::as_published;
    const RecoveredFlux g2 = published ? recover_flux(net, prob, plan, 2) : g1;
    IndicatorReport rep;
    rep.xi.resize(slopes.size());
    double total_sq = 0.0;
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < slopes.size(); ++k) {
        const double lo = g1.nodes[k];
        const double hi = g1.nodes[k + 1];
        const double h = hi - lo;
        const double recovery = plan.integrate(
            [&](double x) {
                const double a = prob.a(x);
                const double d = g1.value_on(k, x) - a * slopes[k];
                return d * d / a;
            },
            lo, hi);
        const double dg = g2.slope_on(k);
        const double residual = plan.integrate(
            [&](double x) {
                const double u = net.value_on(k + off, x);
                const double ru = published ? u : prob.r(x) * u;
                const double res = -dg + ru - prob.f(x);
                return res * res;
            },
            lo, hi);
        const double xi_sq = recovery + h * h * residual;
        rep.xi[k] = std::sqrt(xi_sq);
        total_sq += xi_sq;
        norm_sq += plan.integrate(
            [&](double x) {
                const double v = g1.value_on(k, x);
                return v * v / prob.a(x);
            },
            lo, hi);
    }
    rep.xi_total = std::sqrt(total_sq);
    rep.rel_estimator = norm_sq > 0.0 ? rep.xi_total / std::sqrt(norm_sq)
                                      : std::numeric_limits<double>::infinity();
    return rep;
}

std::vector<std::size_t> mark_average(const IndicatorReport& report) {
    std::vector<std::size_t> marked;
    if (report.xi.empty()) return marked;
    const double mean =
        std::accumulate(report.xi.begin(), report.xi.end(), 0.0) / report.xi.size();
    for (std::size_t k = 0; k < report.xi.size(); ++k)
        if (report.xi[k] >= mean) marked.push_back(k);
    if (marked.empty()) {
        // Only possible through round-off in the mean; fall back to the maximum.
        marked.push_back(static_cast<std::size_t>(
            std::max_element(report.xi.begin(), report.xi.end()) - report.xi.begin()));
    }
    return marked;
}

ShallowReLUNet refine(const ShallowReLUNet& net, std::span<const std::size_t> marked) {
    const Partition& p = net.partition();
    const auto c = net.c();
    const std::size_t off = p.first_free();
    std::vector<char> split(p.size() + 1, 0);
    for (std::size_t k : marked)
        if (k + off <= p.size()) split[k + off] = 1;
    std::vector<double> b;
    std::vector<double> w;
    b.reserve(p.size() + marked.size());
    w.reserve(p.size() + marked.size());
    for (std::size_t k = 0; k <= p.size(); ++k) {
        if (k > 0) {
            b.push_back(p[k - 1]);
            w.push_back(c[k - 1]);
        }
        if (!split[k]) continue;
        const double lo = p.node(k);
        const double hi = p.node_right(k);
        if (0.5 * (hi - lo) < p.min_gap()) continue;
        b.push_back(0.5 * (lo + hi));
        w.push_back(0.0);
    }
    return ShallowReLUNet(net.c0(), std::move(w),
                          Partition(p.x_lo(), p.x_hi(), std::move(b), p.min_gap(), p.anchored()));
}

double convergence_rate(double e_n, std::size_t n) {
    if (!(e_n > 0.0 && e_n < 1.0) || n < 2) return std::numeric_limits<double>::quiet_NaN();
    return std::log(1.0 / e_n) / std::log(static_cast<double>(n));
}

IterTrace run_adbn(const DRObjective& obj, const ShallowReLUNet& net0, const AdaptiveConfig& cfg) {
    IterTrace trace;
    if (!(cfg.eps_stop > 0.0)) throw ConfigError("eps_stop", "must be positive");
    SolverConfig scfg = cfg.solver;
    scfg.method = Method::dbn;
    try {
        BlockNewtonSolver solver(obj, net0, scfg);
        auto indicators = [&] {
            return local_indicators(solver.net(), obj.problem(), obj.plan(), cfg.residual_form);
        };
        trace.records.push_back(solver.snapshot(0, 0.0, false));
        IndicatorReport rep = indicators();
        double prev_xi = rep.xi_total;
        int level_iters = 0;
        int iter = 0;
        trace.status = "max_iters";
        while (iter < scfg.max_iters) {
            IterRecord rec = solver.step();
            rec.iter = ++iter;
            trace.records.push_back(rec);
            ++level_iters;
            rep = indicators();
            const bool stagnated = std::abs(rep.xi_total - prev_xi) < cfg.stagnation_tol;
            prev_xi = rep.xi_total;
            if (!stagnated && level_iters < cfg.max_iters_per_level) continue;

            RefinementEvent ev;
            ev.iter = iter;
            ev.n_before = solver.net().size();
            ev.e_n = rec.e_n;
            ev.xi = rep.xi_total;
            ev.rel_estimator = rep.rel_estimator;
            ev.rate = convergence_rate(rec.e_n, ev.n_before);
            if (rep.rel_estimator <= cfg.eps_stop) {
                ev.n_after = ev.n_before;
                trace.refinements.push_back(ev);
                trace.status = "converged";
                break;
            }
            if (static_cast<int>(trace.refinements.size()) >= cfg.max_refinements ||
                ev.n_before >= cfg.max_neurons) {
                ev.n_after = ev.n_before;
                trace.refinements.push_back(ev);
                trace.status = "refinement_limit";
                break;
            }
            const auto marked = mark_average(rep);
            ShallowReLUNet refined = refine(solver.net(), marked);
            ev.n_after = refined.size();
            trace.refinements.push_back(ev);
            solver.reset(refined);
            rep = indicators();
            prev_xi = rep.xi_total;
            level_iters = 0;
        }
        if (trace.status == "max_iters") {
            const IterRecord& last = trace.records.back();
            RefinementEvent ev;
            ev.iter = iter;
            ev.n_before = ev.n_after = solver.net().size();
            ev.e_n = last.e_n;
            ev.xi = rep.xi_total;
            ev.rel_estimator = rep.rel_estimator;
            ev.rate = convergence_rate(last.e_n, ev.n_before);
            trace.refinements.push_back(ev);
        }
        trace.final_net = solver.net();
        trace.warnings = solver.warnings();
    } catch (const Error& e) {
        trace.status = std::string("aborted: ") + e.what();
    }
    return trace;
}

}  // namespace dbn
