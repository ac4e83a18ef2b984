#pragma once

#include "dbn/assembly.hpp"
#include "dbn/network.hpp"
#include "dbn/partition.hpp"
#include "dbn/quadrature.hpp"
#include "dbn/structured_linalg.hpp"

#include <functional>
#include <span>
#include <vector>

namespace dbn {

/// Weighted least-squares fit J(v) = 1/2 int r (v - f)^2 on [x_lo, x_hi].
struct LSProblem {
    ScalarField f;
    ScalarField r = ScalarField::constant(1.0);
    double x_lo = 0.0;
    double x_hi = 1.0;
    std::vector<Feature> features;
};

/// -(a u')' + r u = f, u(x_lo) = alpha_bc, u(x_hi) = beta_bc, with the right
/// condition imposed through the penalty gamma/2 (v(x_hi) - beta_bc)^2.
struct DRProblem {
    ScalarField a = ScalarField::constant(1.0);
    ScalarField r = ScalarField::constant(1.0);
    ScalarField f = ScalarField::constant(0.0);
    double alpha_bc = 0.0;
    double beta_bc = 0.0;
    double gamma = 1e4;
    double x_lo = 0.0;
    double x_hi = 1.0;
    std::vector<Feature> features;
    /// Use int (f - alpha) psi instead of int (f - alpha r) psi in the linear solve.
    bool literal_rhs = false;
};

/// x = x_lo + L t.
struct CoordinateMap {
    double x_lo = 0.0;
    double length = 1.0;
    double to_physical(double t) const { return x_lo + length * t; }
    double to_unit(double x) const { return (x - x_lo) / length; }
};

struct UnitProblem {
    DRProblem problem;
    CoordinateMap map;
};

/// Restates a problem on (0, 1): a~ = a / L^2, r~ = r, f~ = f, boundary data
/// and penalty unchanged.
UnitProblem to_unit_problem(const DRProblem& prob);

/// t -> value_scale * g(x_lo + L t), with the chain-rule derivative when g has one.
ScalarField pull_back(const ScalarField& g, const CoordinateMap& map, double value_scale = 1.0);

/// H = D(s) D(c) + D(c) A_r D(c) + gamma v v^T with A_r = [beta_{max(i,j)}].
struct StructuredHessian {
    std::vector<double> diag_part;
    std::vector<double> c;
    std::vector<double> ar_beta;
    TriDiagonal ar_inv;
    double gamma = 0.0;
    std::vector<double> rank1;

    std::size_t size() const noexcept { return c.size(); }
    /// O(n) product, used for residual checks.
    std::vector<double> apply(std::span<const double> x) const;
};

StructuredHessian make_structured_hessian(std::vector<double> diag_part, std::span<const double> c,
                                          const AlphaBetaMatrix& ar, double gamma,
                                          std::vector<double> rank1);

/// Trailing principal block of H from index `first` on; it has the same structure.
StructuredHessian trailing_block(const StructuredHessian& h, std::size_t first);

// Least squares.
double ls_loss(const ShallowReLUNet& net, const LSProblem& prob, const IntegrationPlan& plan);
std::vector<double> ls_solve_linear(const LSProblem& prob, const Partition& p,
                                    const IntegrationPlan& plan);
std::vector<double> ls_grad_b(const ShallowReLUNet& net, const LSProblem& prob,
                              const IntegrationPlan& plan);
StructuredHessian ls_hessian(const ShallowReLUNet& net, const LSProblem& prob,
                             const IntegrationPlan& plan);
StructuredHessian gauss_newton_matrix(const ShallowReLUNet& net, const LSProblem& prob,
                                      const IntegrationPlan& plan);

// Diffusion-reaction.
double dr_energy(const ShallowReLUNet& net, const DRProblem& prob, const IntegrationPlan& plan);
std::vector<double> dr_solve_linear(const DRProblem& prob, const Partition& p,
                                    const IntegrationPlan& plan);
std::vector<double> dr_grad_b(const ShallowReLUNet& net, const DRProblem& prob,
                              const IntegrationPlan& plan);
/// `used_fd` is set when a' had to be approximated by finite differences.
StructuredHessian dr_hessian(const ShallowReLUNet& net, const DRProblem& prob,
                             const IntegrationPlan& plan, bool* used_fd = nullptr);
StructuredHessian gauss_newton_matrix(const ShallowReLUNet& net, const DRProblem& prob,
                                      const IntegrationPlan& plan);

/// |u - u_n|_{H^1} / |u|_{H^1}; throws std::domain_error when |u|_{H^1} = 0.
double h1_rel_error(const ShallowReLUNet& net, const ScalarField& du_exact,
                    const IntegrationPlan& plan);
/// ||u - u_n||_{L^2} / ||u||_{L^2}.
double l2_rel_error(const ShallowReLUNet& net, const ScalarField& u_exact,
                    const IntegrationPlan& plan);

}  // namespace dbn
