#pragma once

#include "dbn/models.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace dbn {

enum class Method { dbn, dbgn, bfgs, adbn };

std::string to_string(Method m);
/// Throws ConfigError for unknown names.
Method parse_method(const std::string& name);

struct DampingConfig {
    double init_step = 1.0;
    double shrink = 0.5;
    int max_backtracks = 30;
    double armijo_c = 1e-4;
    /// Score each trial b with the better of the current weights and the exact
    /// linear solve at b; otherwise the weights stay fixed during the search.
    bool resolve_weights = true;
};

struct SolverConfig {
    int max_iters = 100;
    DampingConfig damping;
    /// Stop once ||grad_b J||_2 <= grad_tol (0 disables).
    double grad_tol = 0.0;
    Method method = Method::dbn;
    /// Breakpoint floor as a fraction of the interval length.
    double min_gap_fraction = 1e-8;
    /// dBN: when the Newton step had to be damped, also try the Gauss-Newton
    /// direction and keep whichever step ends lower.
    bool gn_retry = true;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct IterRecord {
    int iter = 0;
    double J = 0.0;
    /// NaN when no exact solution is registered.
    double e_n = 0.0;
    double grad_norm = 0.0;
    double eta = 0.0;
    std::size_t n = 0;
    double wall_ms = 0.0;
    /// The accepted step came from the Gauss-Newton direction during a dBN run.
    bool fallback = false;
};

struct RefinementEvent {
    int iter = 0;
    std::size_t n_before = 0;
    std::size_t n_after = 0;
    double e_n = 0.0;
    double xi = 0.0;
    double rel_estimator = 0.0;
    double rate = 0.0;
};

struct IterTrace {
    std::vector<IterRecord> records;
    std::vector<RefinementEvent> refinements;
    std::optional<ShallowReLUNet> final_net;
    std::string status;
    std::vector<std::string> warnings;
};

/// The pieces of a block objective J(c, b) that the outer iteration needs.
class BlockObjective {
public:
    virtual ~BlockObjective() = default;

    virtual double x_lo() const = 0;
    virtual double x_hi() const = 0;
    /// The fixed output bias.
    virtual double c0() const = 0;

    virtual std::vector<double> solve_linear(const Partition& p) const = 0;
    virtual double loss(const ShallowReLUNet& net) const = 0;
    virtual std::vector<double> grad_b(const ShallowReLUNet& net) const = 0;
    virtual StructuredHessian hessian(const ShallowReLUNet& net) const = 0;
    virtual StructuredHessian gauss_newton(const ShallowReLUNet& net) const = 0;
    /// Relative error against an exact solution, when one is known.
    virtual std::optional<double> rel_error(const ShallowReLUNet&) const { return std::nullopt; }
    /// Warnings raised so far (e.g. finite-difference derivative fallbacks).
    virtual std::vector<std::string> warnings() const { return {}; }
};

class LSObjective : public BlockObjective {
public:
    LSObjective(LSProblem prob, IntegrationPlan plan,
                std::optional<ScalarField> exact_derivative = std::nullopt,
                std::optional<IntegrationPlan> error_plan = std::nullopt);

    double x_lo() const override { return prob_.x_lo; }
    double x_hi() const override { return prob_.x_hi; }
    double c0() const override { return prob_.f(prob_.x_lo); }
    std::vector<double> solve_linear(const Partition& p) const override;
    double loss(const ShallowReLUNet& net) const override;
    std::vector<double> grad_b(const ShallowReLUNet& net) const override;
    StructuredHessian hessian(const ShallowReLUNet& net) const override;
    StructuredHessian gauss_newton(const ShallowReLUNet& net) const override;
    std::optional<double> rel_error(const ShallowReLUNet& net) const override;

    const LSProblem& problem() const noexcept { return prob_; }
    const IntegrationPlan& plan() const noexcept { return plan_; }

private:
    LSProblem prob_;
    IntegrationPlan plan_;
    std::optional<ScalarField> exact_derivative_;
    IntegrationPlan error_plan_;
};

class DRObjective : public BlockObjective {
public:
    DRObjective(DRProblem prob, IntegrationPlan plan,
                std::optional<ScalarField> exact_derivative = std::nullopt,
                std::optional<IntegrationPlan> error_plan = std::nullopt);

    double x_lo() const override { return prob_.x_lo; }
    double x_hi() const override { return prob_.x_hi; }
    double c0() const override { return prob_.alpha_bc; }
    std::vector<double> solve_linear(const Partition& p) const override;
    double loss(const ShallowReLUNet& net) const override;
    std::vector<double> grad_b(const ShallowReLUNet& net) const override;
    StructuredHessian hessian(const ShallowReLUNet& net) const override;
    StructuredHessian gauss_newton(const ShallowReLUNet& net) const override;
    std::optional<double> rel_error(const ShallowReLUNet& net) const override;
    std::vector<std::string> warnings() const override;

    const DRProblem& problem() const noexcept { return prob_; }
    const IntegrationPlan& plan() const noexcept { return plan_; }
    const IntegrationPlan& error_plan() const noexcept { return error_plan_; }

private:
    DRProblem prob_;
    IntegrationPlan plan_;
    std::optional<ScalarField> exact_derivative_;
    IntegrationPlan error_plan_;
    mutable bool used_fd_ = false;
};

/// The plan used for error norms: same splits, 3x panels, order >= 8.
IntegrationPlan error_plan_for(const IntegrationPlan& plan);

struct DampedStep {
    double eta = 0.0;
    ShallowReLUNet net;
    double loss = 0.0;
    /// net carries the exact linear solve at its breakpoints.
    bool resolved = false;
};

/// Backtracking Armijo on the loss. Candidates b - eta p are projected onto
/// admissible partitions before evaluation (see DampingConfig::resolve_weights
/// for the weights used); returns eta = 0 and the unchanged network when no
/// trial is accepted.
DampedStep damped_update(const BlockObjective& obj, const ShallowReLUNet& net,
                         std::span<const double> grad, std::span<const double> direction,
                         const DampingConfig& cfg, double min_gap);

/// One block Gauss-Seidel iteration at a time; shared by the fixed-size and
/// adaptive drivers.
class BlockNewtonSolver {
public:
    /// Replaces the weights of net0 by the exact linear solve.
    BlockNewtonSolver(const BlockObjective& obj, const ShallowReLUNet& net0, SolverConfig cfg);

    const ShallowReLUNet& net() const noexcept { return net_; }
    double loss() const noexcept { return loss_; }
    double last_grad_norm() const noexcept { return grad_norm_; }

    /// Record describing the current state (iteration 0 before any step).
    IterRecord snapshot(int iter, double eta, bool fallback) const;
    /// Direction from the current gradient, damping, the exact linear solve at the
    /// new b, then the gradient there.
    IterRecord step();
    /// Continues from a different network (e.g. after refinement) and re-solves c.
    void reset(const ShallowReLUNet& net);
    double elapsed_ms() const;

    std::vector<std::string> warnings() const;

private:
    ShallowReLUNet solve_weights(Partition p);
    void update_gradient();

    const BlockObjective& obj_;
    SolverConfig cfg_;
    ShallowReLUNet net_;
    double loss_ = 0.0;
    /// Free-breakpoint gradient at net_.
    std::vector<double> grad_;
    double grad_norm_ = 0.0;
    double min_gap_ = 0.0;
    int iter_ = 0;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> warnings_;
};

/// Fixed-size dBN (Newton directions with Gauss-Newton fallback).
IterTrace run_dbn(const BlockObjective& obj, const ShallowReLUNet& net0, SolverConfig cfg);
/// Fixed-size dBGN.
IterTrace run_dbgn(const BlockObjective& obj, const ShallowReLUNet& net0, SolverConfig cfg);
/// Dispatches on cfg.method (dbn or dbgn).
IterTrace run_block_solver(const BlockObjective& obj, const ShallowReLUNet& net0,
                           const SolverConfig& cfg);

}  // namespace dbn
