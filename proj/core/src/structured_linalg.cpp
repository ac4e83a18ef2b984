#include "dbn/structured_linalg.hpp"

#include "dbn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dbn {

namespace {

thread_local OpCounters g_counters;

void touch(std::size_t n) { g_counters.touches += n; }

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": size mismatch (" +
                                    std::to_string(got) + " vs " + std::to_string(want) + ")");
}

}  // namespace

OpCounters& op_counters() { return g_counters; }
void reset_op_counters() { g_counters = OpCounters{}; }

TriDiagonal::TriDiagonal(std::vector<double> sub_, std::vector<double> diag_,
                         std::vector<double> sup_)
    : sub(std::move(sub_)), diag(std::move(diag_)), sup(std::move(sup_)) {
    const std::size_t off = diag.empty() ? 0 : diag.size() - 1;
    if (sub.size() != off || sup.size() != off)
        throw std::invalid_argument("TriDiagonal: band lengths must be n-1");
}

TriDiagonal TriDiagonal::identity(std::size_t n) {
    TriDiagonal t(n);
    std::fill(t.diag.begin(), t.diag.end(), 1.0);
    return t;
}

double TriDiagonal::max_abs_entry() const {
    double m = 0.0;
    for (double v : diag) m = std::max(m, std::abs(v));
    for (double v : sub) m = std::max(m, std::abs(v));
    for (double v : sup) m = std::max(m, std::abs(v));
    return m;
}

double TriDiagonal::entry(std::size_t i, std::size_t j) const {
    if (i == j) return diag[i];
    if (j == i + 1) return sup[i];
    if (i == j + 1) return sub[j];
    return 0.0;
}

std::vector<double> TriDiagonal::apply(std::span<const double> x) const {
    const std::size_t n = size();
    require_size(x.size(), n, "TriDiagonal::apply");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += sub[i - 1] * x[i - 1];
        if (i + 1 < n) s += sup[i] * x[i + 1];
        y[i] = s;
    }
    touch(n);
    return y;
}

TriDiagonal operator+(const TriDiagonal& a, const TriDiagonal& b) {
    require_size(a.size(), b.size(), "TriDiagonal::operator+");
    TriDiagonal t(a.size());
    for (std::size_t i = 0; i < a.diag.size(); ++i) t.diag[i] = a.diag[i] + b.diag[i];
    for (std::size_t i = 0; i < a.sub.size(); ++i) {
        t.sub[i] = a.sub[i] + b.sub[i];
        t.sup[i] = a.sup[i] + b.sup[i];
    }
    return t;
}

std::vector<double> tridiag_solve(const TriDiagonal& t, std::span<const double> rhs) {
    const std::size_t n = t.size();
    require_size(rhs.size(), n, "tridiag_solve");
    std::vector<double> x(rhs.begin(), rhs.end());
    if (n == 0) return x;
    const double threshold = 1e-14 * t.max_abs_entry();
    std::vector<double> c(n);
    double pivot = t.diag[0];
    if (!(std::abs(pivot) > threshold)) throw SingularMatrixError(0, pivot);
    for (std::size_t i = 0;; ++i) {
        c[i] = i + 1 < n ? t.sup[i] / pivot : 0.0;
        x[i] /= pivot;
        if (i + 1 == n) break;
        pivot = t.diag[i + 1] - t.sub[i] * c[i];
        if (!(std::abs(pivot) > threshold)) throw SingularMatrixError(i + 1, pivot);
        x[i + 1] -= t.sub[i] * x[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    touch(2 * n);
    ++g_counters.tridiag_solves;
    return x;
}

AlphaBetaMatrix::AlphaBetaMatrix(std::vector<double> alpha, std::vector<double> beta)
    : alpha_(std::move(alpha)), beta_(std::move(beta)) {
    const std::size_t n = alpha_.size();
    if (n == 0 || beta_.size() != n)
        throw HypothesisError("AlphaBetaMatrix: alpha and beta must be nonempty and equal length");
    double amax = 0.0;
    double bmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(alpha_[i]) || !std::isfinite(beta_[i]))
            throw HypothesisError("AlphaBetaMatrix: non-finite entry");
        amax = std::max(amax, std::abs(alpha_[i]));
        bmax = std::max(bmax, std::abs(beta_[i]));
    }
    const double tol = 1e-14 * amax * bmax;
    if (!(std::abs(alpha_[0]) * bmax > tol)) throw HypothesisError("AlphaBetaMatrix: alpha_1 = 0");
    if (!(std::abs(beta_[n - 1]) * amax > tol))
        throw HypothesisError("AlphaBetaMatrix: beta_n = 0");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double det = alpha_[i + 1] * beta_[i] - alpha_[i] * beta_[i + 1];
        if (!(std::abs(det) > tol))
            throw HypothesisError("AlphaBetaMatrix: degenerate pair at index " +
                                  std::to_string(i + 1));
    }
}

std::vector<double> AlphaBetaMatrix::apply(std::span<const double> x) const {
    const std::size_t n = size();
    require_size(x.size(), n, "AlphaBetaMatrix::apply");
    // y_i = beta_i * sum_{j<=i} alpha_j x_j + alpha_i * sum_{j>i} beta_j x_j
    std::vector<double> y(n);
    double prefix = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        prefix += alpha_[i] * x[i];
        y[i] = beta_[i] * prefix;
    }
    double suffix = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        y[i] += alpha_[i] * suffix;
        suffix += beta_[i] * x[i];
    }
    touch(2 * n);
    return y;
}

TriDiagonal alphabeta_inverse(const AlphaBetaMatrix& m) {
    const std::size_t n = m.size();
    const auto alpha = m.alpha();
    const auto beta = m.beta();
    // 1-based with alpha_0 = beta_{n+1} = 0, alpha_{n+1} = beta_0 = 1.
    auto a = [&](std::size_t i) { return i == 0 ? 0.0 : (i == n + 1 ? 1.0 : alpha[i - 1]); };
    auto b = [&](std::size_t i) { return i == 0 ? 1.0 : (i == n + 1 ? 0.0 : beta[i - 1]); };
    TriDiagonal t(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double num = a(i + 1) * b(i - 1) - a(i - 1) * b(i + 1);
        const double left = a(i) * b(i - 1) - a(i - 1) * b(i);
        const double right = a(i + 1) * b(i) - a(i) * b(i + 1);
        t.diag[i - 1] = num / (left * right);
        if (i < n) {
            t.sup[i - 1] = -1.0 / right;
            t.sub[i - 1] = t.sup[i - 1];
        }
    }
    touch(n);
    return t;
}

std::vector<double> apply_G(std::span<const double> x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - (i ? x[i - 1] : 0.0);
    touch(x.size());
    return y;
}

std::vector<double> apply_Ginv(std::span<const double> x) {
    std::vector<double> y(x.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = (s += x[i]);
    touch(x.size());
    return y;
}

std::vector<double> apply_GT(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - (i + 1 < n ? x[i + 1] : 0.0);
    touch(n);
    return y;
}

std::vector<double> apply_GTinv(std::span<const double> x) {
    std::vector<double> y(x.size());
    double s = 0.0;
    for (std::size_t i = x.size(); i-- > 0;) y[i] = (s += x[i]);
    touch(x.size());
    return y;
}

namespace {

void scale_by_gaps(const Partition& p, std::vector<double>& v, bool divide) {
    const auto h = p.neuron_gaps();
    require_size(v.size(), h.size(), "Q operator");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = divide ? v[i] / h[i] : v[i] * h[i];
    touch(v.size());
}

}  // namespace

std::vector<double> q_apply(const Partition& p, std::span<const double> x) {
    auto y = apply_G(x);
    scale_by_gaps(p, y, true);
    return apply_G(y);
}

std::vector<double> q_solve(const Partition& p, std::span<const double> rhs) {
    auto y = apply_Ginv(rhs);
    scale_by_gaps(p, y, false);
    return apply_Ginv(y);
}

std::vector<double> qt_apply(const Partition& p, std::span<const double> x) {
    auto y = apply_GT(x);
    scale_by_gaps(p, y, true);
    return apply_GT(y);
}

std::vector<double> qt_solve(const Partition& p, std::span<const double> rhs) {
    auto y = apply_GTinv(rhs);
    scale_by_gaps(p, y, false);
    return apply_GTinv(y);
}

std::vector<double> sherman_morrison_solve(const RankOneUpdate& upd, std::span<const double> rhs) {
    const std::size_t n = rhs.size();
    auto y = upd.base_solve(rhs);
    ++g_counters.base_solves;
    if (upd.gamma == 0.0) return y;
    require_size(upd.u.size(), n, "sherman_morrison_solve");
    require_size(upd.v.size(), n, "sherman_morrison_solve");
    auto z = upd.base_solve(upd.u);
    ++g_counters.base_solves;
    const double vz = upd.gamma * dot(upd.v, z);
    const double denom = 1.0 + vz;
    if (!(std::abs(denom) > 1e-12 * (1.0 + std::abs(vz)))) throw SingularUpdateError(denom);
    const double coef = upd.gamma * dot(upd.v, y) / denom;
    for (std::size_t i = 0; i < n; ++i) y[i] -= coef * z[i];
    touch(3 * n);
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_size(a.size(), b.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace dbn
