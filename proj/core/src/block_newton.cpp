#include "dbn/block_newton.hpp"

#include "dbn/directions.hpp"
#include "dbn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dbn {

std::string to_string(Method m) {
    switch (m) {
        case Method::dbn: return "dbn";
        case Method::dbgn: return "dbgn";
        case Method::bfgs: return "bfgs";
        case Method::adbn: return "adbn";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "dbn") return Method::dbn;
    if (name == "dbgn") return Method::dbgn;
    if (name == "bfgs") return Method::bfgs;
    if (name == "adbn") return Method::adbn;
    throw ConfigError("method", "unknown method '" + name + "' (expected dbn, dbgn, bfgs, adbn)");
}

void SolverConfig::validate() const {
    if (max_iters < 0) throw ConfigError("max_iters", "must be non-negative");
    if (!(damping.shrink > 0.0 && damping.shrink < 1.0))
        throw ConfigError("damping.shrink", "must lie in (0, 1)");
    if (damping.max_backtracks < 1) throw ConfigError("damping.max_backtracks", "must be >= 1");
    if (!(damping.init_step > 0.0)) throw ConfigError("damping.init_step", "must be positive");
    if (!(damping.armijo_c > 0.0 && damping.armijo_c < 1.0))
        throw ConfigError("damping.armijo_c", "must lie in (0, 1)");
    if (!(min_gap_fraction > 0.0 && min_gap_fraction < 1.0))
        throw ConfigError("min_gap_fraction", "must lie in (0, 1)");
    if (grad_tol < 0.0) throw ConfigError("grad_tol", "must be non-negative");
}

IntegrationPlan error_plan_for(const IntegrationPlan& plan) { return plan.refined(3, 8); }

LSObjective::LSObjective(LSProblem prob, IntegrationPlan plan,
                         std::optional<ScalarField> exact_derivative,
                         std::optional<IntegrationPlan> error_plan)
    : prob_(std::move(prob)), plan_(std::move(plan)),
      exact_derivative_(std::move(exact_derivative)),
      error_plan_(error_plan ? std::move(*error_plan) : error_plan_for(plan_)) {}

std::vector<double> LSObjective::solve_linear(const Partition& p) const {
    return ls_solve_linear(prob_, p, plan_);
}
double LSObjective::loss(const ShallowReLUNet& net) const { return ls_loss(net, prob_, plan_); }
std::vector<double> LSObjective::grad_b(const ShallowReLUNet& net) const {
    return ls_grad_b(net, prob_, plan_);
}
StructuredHessian LSObjective::hessian(const ShallowReLUNet& net) const {
    return ls_hessian(net, prob_, plan_);
}
StructuredHessian LSObjective::gauss_newton(const ShallowReLUNet& net) const {
    return gauss_newton_matrix(net, prob_, plan_);
}
std::optional<double> LSObjective::rel_error(const ShallowReLUNet& net) const {
    if (!exact_derivative_) return std::nullopt;
    return h1_rel_error(net, *exact_derivative_, error_plan_);
}

DRObjective::DRObjective(DRProblem prob, IntegrationPlan plan,
                         std::optional<ScalarField> exact_derivative,
                         std::optional<IntegrationPlan> error_plan)
    : prob_(std::move(prob)), plan_(std::move(plan)),
      exact_derivative_(std::move(exact_derivative)),
      error_plan_(error_plan ? std::move(*error_plan) : error_plan_for(plan_)) {
    if (!(prob_.gamma > 0.0)) throw ConfigError("gamma", "penalty must be positive");
}

std::vector<double> DRObjective::solve_linear(const Partition& p) const {
    return dr_solve_linear(prob_, p, plan_);
}
double DRObjective::loss(const ShallowReLUNet& net) const { return dr_energy(net, prob_, plan_); }
std::vector<double> DRObjective::grad_b(const ShallowReLUNet& net) const {
    return dr_grad_b(net, prob_, plan_);
}
StructuredHessian DRObjective::hessian(const ShallowReLUNet& net) const {
    return dr_hessian(net, prob_, plan_, &used_fd_);
}
StructuredHessian DRObjective::gauss_newton(const ShallowReLUNet& net) const {
    return gauss_newton_matrix(net, prob_, plan_);
}
std::optional<double> DRObjective::rel_error(const ShallowReLUNet& net) const {
    if (!exact_derivative_) return std::nullopt;
    return h1_rel_error(net, *exact_derivative_, error_plan_);
}
std::vector<std::string> DRObjective::warnings() const {
    if (used_fd_) return {"diffusion derivative approximated by central differences"};
    return {};
}

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Gradient with the pinned anchor component zeroed.
std::vector<double> free_gradient(const BlockObjective& obj, const ShallowReLUNet& net) {
    auto g = obj.grad_b(net);
    if (net.partition().anchored()) g[0] = 0.0;
    return g;
}

/// Direction on the movable breakpoints, padded with zeros for the anchor.
template <class Solve>
std::vector<double> free_direction(const StructuredHessian& h, std::span<const double> grad,
                                   std::size_t first, const Solve& solve) {
    if (first == 0) return solve(h, grad);
    if (grad.size() <= first) return std::vector<double>(grad.size(), 0.0);
    auto d = solve(trailing_block(h, first), grad.subspan(first));
    d.insert(d.begin(), first, 0.0);
    return d;
}

}  // namespace

DampedStep damped_update(const BlockObjective& obj, const ShallowReLUNet& net,
                         std::span<const double> grad, std::span<const double> direction,
                         const DampingConfig& cfg, double min_gap) {
    const Partition& p0 = net.partition();
    const double j0 = obj.loss(net);
    DampedStep none{0.0, net, j0, false};
    if (!all_finite(direction) || norm_inf(direction) == 0.0) return none;
    const double slope = dot(grad, direction);
    if (!(slope > 0.0)) return none;
    const auto b = p0.breakpoints();
    std::vector<double> raw(b.size());
    double eta = cfg.init_step;
    for (int t = 0; t < cfg.max_backtracks; ++t, eta *= cfg.shrink) {
        for (std::size_t i = 0; i < b.size(); ++i) raw[i] = b[i] - eta * direction[i];
        Partition cand =
            Partition::project_ordered(raw, p0.x_lo(), p0.x_hi(), min_gap, p0.anchored());
        DampedStep trial{eta, net.with_partition(cand), 0.0, false};
        trial.loss = obj.loss(trial.net);
        if (cfg.resolve_weights) {
            try {
                auto c = obj.solve_linear(cand);
                if (all_finite(c)) {
                    ShallowReLUNet solved(net.c0(), std::move(c), std::move(cand));
                    const double js = obj.loss(solved);
                    if (js <= trial.loss) trial = {eta, std::move(solved), js, true};
                }
            } catch (const Error&) {
                // Keep the current weights for this trial.
            }
        }
        if (trial.loss <= j0 - cfg.armijo_c * eta * slope && trial.loss <= j0) return trial;
    }
    return none;
}

BlockNewtonSolver::BlockNewtonSolver(const BlockObjective& obj, const ShallowReLUNet& net0,
                                     SolverConfig cfg)
    : obj_(obj), cfg_(cfg), net_(net0), start_(std::chrono::steady_clock::now()) {
    cfg_.validate();
    min_gap_ = std::max(net0.partition().min_gap(),
                        cfg_.min_gap_fraction * (obj.x_hi() - obj.x_lo()));
    reset(net0);
}

void BlockNewtonSolver::reset(const ShallowReLUNet& net) {
    net_ = solve_weights(net.partition());
    loss_ = obj_.loss(net_);
    update_gradient();
}

void BlockNewtonSolver::update_gradient() {
    grad_ = free_gradient(obj_, net_);
    grad_norm_ = norm2(grad_);
}

ShallowReLUNet BlockNewtonSolver::solve_weights(Partition p) {
    for (int attempt = 0;; ++attempt) {
        try {
            auto c = obj_.solve_linear(p);
            if (all_finite(c)) return ShallowReLUNet(obj_.c0(), std::move(c), p);
            throw SingularMatrixError(0, std::numeric_limits<double>::quiet_NaN());
        } catch (const Error& e) {
            if (attempt >= 20) throw;
            min_gap_ *= 2.0;
            warnings_.push_back(std::string("linear solve failed (") + e.what() +
                                "); re-projected with min_gap " + std::to_string(min_gap_));
            p = Partition::project_ordered(p.breakpoints(), p.x_lo(), p.x_hi(), min_gap_, p.anchored());
        }
    }
}

double BlockNewtonSolver::elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
}

IterRecord BlockNewtonSolver::snapshot(int iter, double eta, bool fallback) const {
    IterRecord rec;
    rec.iter = iter;
    rec.J = loss_;
    rec.e_n = obj_.rel_error(net_).value_or(std::numeric_limits<double>::quiet_NaN());
    rec.grad_norm = grad_norm_;
    rec.eta = eta;
    rec.n = net_.size();
    rec.wall_ms = elapsed_ms();
    rec.fallback = fallback;
    return rec;
}

IterRecord BlockNewtonSolver::step() {
    ++iter_;
    const std::vector<double> grad = grad_;
    const std::size_t first = net_.partition().first_free();
    if (cfg_.grad_tol > 0.0 && grad_norm_ <= cfg_.grad_tol) return snapshot(iter_, 0.0, false);

    const bool newton = cfg_.method == Method::dbn || cfg_.method == Method::adbn;
    auto newton_dir = [&]() -> std::vector<double> {
        try {
            auto d = free_direction(obj_.hessian(net_), grad, first,
                                    [](const auto& h, auto g) { return newton_direction(h, g); });
            if (all_finite(d) && dot(grad, d) > 0.0) return d;
        } catch (const SingularMatrixError&) {
        } catch (const SingularUpdateError&) {
        }
        return {};
    };
    auto gn_dir = [&] {
        return free_direction(obj_.gauss_newton(net_), grad, first,
                              [](const auto& h, auto g) { return gn_direction(h, g); });
    };

    std::optional<DampedStep> ds;
    bool fallback = false;
    try {
        if (newton) {
            const auto dir = newton_dir();
            if (!dir.empty()) ds = damped_update(obj_, net_, grad, dir, cfg_.damping, min_gap_);
        }
        if (!ds || (newton && cfg_.gn_retry && ds->eta < 1.0)) {
            DampedStep alt = damped_update(obj_, net_, grad, gn_dir(), cfg_.damping, min_gap_);
            if (!ds || (alt.eta > 0.0 && alt.loss < ds->loss)) {
                fallback = newton;
                ds = std::move(alt);
            }
        }
    } catch (const Error& e) {
        // Degenerate A_r or a singular Gauss-Newton solve: widen the gap floor and retry later.
        min_gap_ *= 2.0;
        warnings_.push_back(std::string("direction solve failed (") + e.what() +
                            "); re-projected with min_gap " + std::to_string(min_gap_));
        const Partition& p = net_.partition();
        net_ = solve_weights(Partition::project_ordered(p.breakpoints(), p.x_lo(), p.x_hi(),
                                                        min_gap_, p.anchored()));
        loss_ = obj_.loss(net_);
        update_gradient();
        return snapshot(iter_, 0.0, true);
    }

    if (ds->eta > 0.0) {
        if (ds->resolved) {
            net_ = std::move(ds->net);
            loss_ = ds->loss;
        } else {
            ShallowReLUNet solved = solve_weights(ds->net.partition());
            const bool same = std::ranges::equal(solved.partition().breakpoints(),
                                                 ds->net.partition().breakpoints());
            const ShallowReLUNet moved = net_.with_partition(solved.partition());
            const double solved_loss = obj_.loss(solved);
            const double moved_loss = same ? ds->loss : obj_.loss(moved);
            // Keep the exact solve unless round-off made it worse than the old weights.
            if (solved_loss <= moved_loss) {
                net_ = std::move(solved);
                loss_ = solved_loss;
            } else {
                net_ = moved;
                loss_ = moved_loss;
            }
        }
        update_gradient();
    }
    return snapshot(iter_, ds->eta, fallback);
}

std::vector<std::string> BlockNewtonSolver::warnings() const {
    auto out = warnings_;
    for (auto& w : obj_.warnings()) out.push_back(w);
    return out;
}

namespace {

IterTrace run_fixed(const BlockObjective& obj, const ShallowReLUNet& net0, SolverConfig cfg) {
    IterTrace trace;
    try {
        BlockNewtonSolver solver(obj, net0, cfg);
        trace.records.push_back(solver.snapshot(0, 0.0, false));
        trace.status = "max_iters";
        for (int k = 1; k <= cfg.max_iters; ++k) {
            trace.records.push_back(solver.step());
            if (cfg.grad_tol > 0.0 && solver.last_grad_norm() <= cfg.grad_tol) {
                trace.status = "converged";
                break;
            }
        }
        trace.final_net = solver.net();
        trace.warnings = solver.warnings();
    } catch (const Error& e) {
        trace.status = std::string("aborted: ") + e.what();
    }
    return trace;
}

}  // namespace

IterTrace run_dbn(const BlockObjective& obj, const ShallowReLUNet& net0, SolverConfig cfg) {
    cfg.method = Method::dbn;
    return run_fixed(obj, net0, cfg);
}

IterTrace run_dbgn(const BlockObjective& obj, const ShallowReLUNet& net0, SolverConfig cfg) {
    cfg.method = Method::dbgn;
    return run_fixed(obj, net0, cfg);
}

IterTrace run_block_solver(const BlockObjective& obj, const ShallowReLUNet& net0,
                           const SolverConfig& cfg) {
    if (cfg.method == Method::dbgn) return run_dbgn(obj, net0, cfg);
    return run_dbn(obj, net0, cfg);
}

}  // namespace dbn
