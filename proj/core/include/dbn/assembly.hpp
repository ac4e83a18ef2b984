#pragma once

#include "dbn/partition.hpp"
#include "dbn/quadrature.hpp"
#include "dbn/structured_linalg.hpp"

#include <span>
#include <vector>

namespace dbn {

enum class OperatorKind { mass, stiffness, mass_plus_stiffness };

/// Middle factor T of M_r(b) = Q^{-T} T Q^{-1}.
///
/// With A_i = s_i^0, B_i = s_i^1 / h_i, C_i = s_i^2 / h_i^2 (i = 1..n):
///   T_jj = C_j + A_{j+1} - 2 B_{j+1} + C_{j+1}   (T_nn = C_n)
///   T_{j,j+1} = B_{j+1} - C_{j+1}
TriDiagonal assemble_T_mass(const ScalarField& r, const Partition& p, const IntegrationPlan& plan);

/// Middle factor of A_a(b) = Q^{-T} T Q^{-1}, T = G^T D(h)^{-2} D_a(s^0) G.
TriDiagonal assemble_T_stiff(const ScalarField& a, const Partition& p,
                             const IntegrationPlan& plan);

/// A symmetric Gram matrix stored as Q^{-T} T Q^{-1}.
class FactorizedOperator {
public:
    FactorizedOperator(Partition p, TriDiagonal t, OperatorKind kind)
        : p_(std::move(p)), t_(std::move(t)), kind_(kind) {}

    static FactorizedOperator mass(const ScalarField& r, const Partition& p,
                                   const IntegrationPlan& plan);
    static FactorizedOperator stiffness(const ScalarField& a, const Partition& p,
                                        const IntegrationPlan& plan);
    static FactorizedOperator mass_plus_stiffness(const ScalarField& a, const ScalarField& r,
                                                  const Partition& p,
                                                  const IntegrationPlan& plan);

    const Partition& partition() const noexcept { return p_; }
    const TriDiagonal& middle() const noexcept { return t_; }
    OperatorKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return t_.size(); }

    std::vector<double> apply(std::span<const double> x) const;
    /// Q T^{-1} Q^T y; throws SingularMatrixError from the tridiagonal solve.
    std::vector<double> apply_inverse(std::span<const double> y) const;

private:
    Partition p_;
    TriDiagonal t_;
    OperatorKind kind_;
};

/// M_r^{-1} = M_2^{-1} (M_1^{-1} + M_2^{-1})^{-1} M_1^{-1} with
/// M_1 = [beta1_{max(i,j)}], M_2 = [alpha2_{min(i,j)} beta2_{max(i,j)}].
class AlgebraicMassInverse {
public:
    AlgebraicMassInverse(TriDiagonal m1inv, TriDiagonal m2inv);

    const TriDiagonal& m1_inverse() const noexcept { return m1inv_; }
    const TriDiagonal& m2_inverse() const noexcept { return m2inv_; }
    const TriDiagonal& middle() const noexcept { return middle_; }

    std::vector<double> apply_inverse(std::span<const double> y) const;

private:
    TriDiagonal m1inv_;
    TriDiagonal m2inv_;
    TriDiagonal middle_;
};

/// Throws HypothesisError when either alpha-beta factor is degenerate.
AlgebraicMassInverse assemble_mass_algebraic(const ScalarField& r, const Partition& p,
                                             const IntegrationPlan& plan);

/// A_r(b) as an alpha-beta matrix: alpha = 1, beta_i = int_{b_i}^{x_hi} r.
AlphaBetaMatrix coefficient_matrix(const ScalarField& r, const Partition& p,
                                   const IntegrationPlan& plan);

/// v_i = int_{b_i}^{x_hi} r (f - f(x_lo)) (x - b_i) dx.
std::vector<double> rhs_ls(const ScalarField& f, const ScalarField& r, const Partition& p,
                           const IntegrationPlan& plan);

/// v_i = int_{b_i}^{x_hi} (f - alpha r)(x - b_i) dx, or (f - alpha) when `literal` is set.
std::vector<double> rhs_dr(const ScalarField& f, const ScalarField& r, double alpha_bc,
                           const Partition& p, const IntegrationPlan& plan,
                           bool literal = false);

/// d_i = x_hi - b_i, the gradient of u_n(x_hi) with respect to c.
std::vector<double> boundary_gradient_vector(const Partition& p);

}  // namespace dbn
