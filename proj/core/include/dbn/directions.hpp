#pragma once

#include "dbn/models.hpp"

#include <span>
#include <vector>

namespace dbn {

/// Copy of c with |c_i| < 1e-12 ||c||_inf replaced by +-1e-12 ||c||_inf (sign kept,
/// zero treated as positive).
std::vector<double> guard_weights(std::span<const double> c);

/// Solves H p = grad with H = D(s)D(c) + D(c)A_rD(c) + gamma v v^T in O(n):
///   (D(s)D(c) + D(c)A_rD(c))^{-1} = (I + D(c)^{-1}A_r^{-1}D(s))^{-1} D(c)^{-1}A_r^{-1}D(c)^{-1},
/// where the first factor is tridiagonal, followed by Sherman-Morrison for the rank-one term.
/// Throws SingularMatrixError or SingularUpdateError.
std::vector<double> newton_direction(const StructuredHessian& h, std::span<const double> grad);

/// Same solve with s = 0: D(c)^{-1}A_r^{-1}D(c)^{-1} plus Sherman-Morrison.
std::vector<double> gn_direction(const StructuredHessian& h, std::span<const double> grad);

}  // namespace dbn
