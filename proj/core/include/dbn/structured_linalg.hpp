#pragma once

#include "dbn/partition.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dbn {

/// Per-thread tally of index touches in the O(n) kernels; tests use it to
/// check that each kernel visits every index a bounded number of times.
struct OpCounters {
    std::size_t touches = 0;
    std::size_t tridiag_solves = 0;
    std::size_t base_solves = 0;
};

OpCounters& op_counters();
void reset_op_counters();

/// Three-band matrix; sub and sup have n-1 entries.
struct TriDiagonal {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> sup;

    TriDiagonal() = default;
    explicit TriDiagonal(std::size_t n) : sub(n ? n - 1 : 0), diag(n), sup(n ? n - 1 : 0) {}
    TriDiagonal(std::vector<double> sub_, std::vector<double> diag_, std::vector<double> sup_);

    static TriDiagonal identity(std::size_t n);

    std::size_t size() const noexcept { return diag.size(); }
    double max_abs_entry() const;
    double entry(std::size_t i, std::size_t j) const;

    std::vector<double> apply(std::span<const double> x) const;
};

TriDiagonal operator+(const TriDiagonal& a, const TriDiagonal& b);

/// Thomas elimination without pivoting. Throws SingularMatrixError when a
/// pivot falls below 1e-14 * max|entry|.
std::vector<double> tridiag_solve(const TriDiagonal& t, std::span<const double> rhs);

/// Dense symmetric matrix with entries alpha_{min(i,j)} * beta_{max(i,j)}.
class AlphaBetaMatrix {
public:
    /// Throws HypothesisError unless alpha_1 != 0, beta_n != 0 and
    /// alpha_{i+1} beta_i != alpha_i beta_{i+1} (relative tolerance 1e-14).
    AlphaBetaMatrix(std::vector<double> alpha, std::vector<double> beta);

    std::size_t size() const noexcept { return alpha_.size(); }
    std::span<const double> alpha() const noexcept { return alpha_; }
    std::span<const double> beta() const noexcept { return beta_; }
    double entry(std::size_t i, std::size_t j) const {
        return i <= j ? alpha_[i] * beta_[j] : alpha_[j] * beta_[i];
    }

    /// Matrix-vector product in O(n) via prefix and suffix sums.
    std::vector<double> apply(std::span<const double> x) const;

private:
    std::vector<double> alpha_;
    std::vector<double> beta_;
};

/// Closed-form symmetric tridiagonal inverse of an alpha-beta matrix.
TriDiagonal alphabeta_inverse(const AlphaBetaMatrix& m);

/// First difference: (Gx)_i = x_i - x_{i-1}.
std::vector<double> apply_G(std::span<const double> x);
/// Prefix sum.
std::vector<double> apply_Ginv(std::span<const double> x);
/// (G^T x)_i = x_i - x_{i+1}.
std::vector<double> apply_GT(std::span<const double> x);
/// Suffix sum.
std::vector<double> apply_GTinv(std::span<const double> x);

/// Q = G D(h)^{-1} G with D(h) = diag(h_1..h_n), the neuron gaps of p.
std::vector<double> q_apply(const Partition& p, std::span<const double> x);
std::vector<double> q_solve(const Partition& p, std::span<const double> rhs);
std::vector<double> qt_apply(const Partition& p, std::span<const double> x);
std::vector<double> qt_solve(const Partition& p, std::span<const double> rhs);

using LinearSolve = std::function<std::vector<double>(std::span<const double>)>;

/// B + gamma u v^T, with B available only through its solve.
struct RankOneUpdate {
    LinearSolve base_solve;
    std::vector<double> u;
    std::vector<double> v;
    double gamma = 0.0;
};

/// Sherman-Morrison with exactly two base solves. Throws SingularUpdateError
/// when |1 + gamma v^T B^{-1} u| < 1e-12 * (1 + |gamma v^T B^{-1} u|).
std::vector<double> sherman_morrison_solve(const RankOneUpdate& upd, std::span<const double> rhs);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace dbn
