#pragma once

#include "dbn/block_newton.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dbn {

/// Nodal values of a continuous piecewise-linear recovery on the ends of the
/// non-empty subintervals (x_lo, b_1..b_n, x_hi without the anchor duplicate).
struct RecoveredFlux {
    std::vector<double> nodes;
    std::vector<double> values;

    double value_on(std::size_t k, double x) const {
        const double t = (x - nodes[k]) / (nodes[k + 1] - nodes[k]);
        return values[k] + t * (values[k + 1] - values[k]);
    }
    double slope_on(std::size_t k) const {
        return (values[k + 1] - values[k]) / (nodes[k + 1] - nodes[k]);
    }
};

enum class ResidualForm {
    /// -G'(a^2 u_n') + u_n - f.
    as_published,
    /// -G'(a u_n') + r u_n - f.
    conventional,
};

struct IndicatorReport {
    /// One indicator per non-empty subinterval, left to right.
    std::vector<double> xi;
    double xi_total = 0.0;
    /// xi_total / ||a^{-1/2} G(a u_n')||.
    double rel_estimator = 0.0;
};

/// Recovery of `power`-weighted flux a^power u_n': per-interval values
/// q_k = u_n'|_{I_k} * mean(a^power over I_k), interior nodes
/// (h_{k-1} q_k + h_k q_{k-1}) / (h_{k-1} + h_k), endpoints copy the adjacent q.
RecoveredFlux recover_flux(const ShallowReLUNet& net, const DRProblem& prob,
                           const IntegrationPlan& plan, int power = 1);

/// Nodal averaging from given per-interval fluxes (exposed for tests).
RecoveredFlux recover_from_interval_fluxes(std::span<const double> nodes,
                                           std::span<const double> q);

IndicatorReport local_indicators(const ShallowReLUNet& net, const DRProblem& prob,
                                 const IntegrationPlan& plan,
                                 ResidualForm form = ResidualForm::as_published);

/// Indices K with xi_K >= mean(xi); never empty for nonempty input.
std::vector<std::size_t> mark_average(const IndicatorReport& report);

/// Inserts the midpoint of every marked cell (indices as in IndicatorReport) as a new breakpoint with
/// zero weight, so the represented function is unchanged. Midpoints that
/// would violate the gap floor are skipped.
ShallowReLUNet refine(const ShallowReLUNet& net, std::span<const std::size_t> marked);

struct AdaptiveConfig {
    SolverConfig solver;
    double eps_stop = 0.05;
    /// Refine once |xi_total^(k) - xi_total^(k-1)| drops below this.
    double stagnation_tol = 1e-7;
    /// dBN iterations allowed on one network size before refining anyway.
    int max_iters_per_level = 100;
    std::size_t max_neurons = 2000;
    int max_refinements = 30;
    ResidualForm residual_form = ResidualForm::as_published;
};

/// ln(1/e) / ln(n); NaN when e >= 1 or n < 2.
double convergence_rate(double e_n, std::size_t n);

/// AdBN: dBN iterations, refining on estimator stagnation, stopping when the
/// relative estimator reaches eps_stop. Every level end (including the last)
/// is recorded as a RefinementEvent with the level's n, e_n, xi and rate.
IterTrace run_adbn(const DRObjective& obj, const ShallowReLUNet& net0, const AdaptiveConfig& cfg);

}  // namespace dbn
