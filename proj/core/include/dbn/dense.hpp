#pragma once

#include "dbn/models.hpp"
#include "dbn/structured_linalg.hpp"

#include <Eigen/Dense>

namespace dbn {

/// m_ij = int r relu(x - b_i) relu(x - b_j) dx, assembled entry by entry from
/// whole-tail integrals over [b_max, x_hi]. Intended for n up to a few hundred.
Eigen::MatrixXd dense_mass(const ScalarField& r, const Partition& p, const IntegrationPlan& plan);

/// a_ij = int a H(x - b_i) H(x - b_j) dx.
Eigen::MatrixXd dense_stiffness(const ScalarField& a, const Partition& p,
                                const IntegrationPlan& plan);

Eigen::MatrixXd to_dense(const TriDiagonal& t);
Eigen::MatrixXd to_dense(const AlphaBetaMatrix& m);
/// D(s)D(c) + D(c)A_rD(c) + gamma v v^T.
Eigen::MatrixXd to_dense(const StructuredHessian& h);
/// Q = G D(h)^{-1} G.
Eigen::MatrixXd dense_Q(const Partition& p);

}  // namespace dbn
