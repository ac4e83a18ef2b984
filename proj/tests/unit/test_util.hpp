#pragma once

#include "dbn/partition.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

namespace dbn::oracle {

/// Random admissible partition of (lo, hi) with n breakpoints whose gaps are
/// at least `spread` times the uniform gap.
inline Partition random_partition(std::mt19937_64& rng, std::size_t n, double lo = 0.0,
                                  double hi = 1.0, double spread = 0.2) {
    std::uniform_real_distribution<double> u(spread, 1.0);
    std::vector<double> w(n + 1);
    for (auto& x : w) x = u(rng);
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<double> b(n);
    double acc = lo;
    for (std::size_t i = 0; i < n; ++i) {
        acc += (hi - lo) * w[i] / total;
        b[i] = acc;
    }
    return Partition(lo, hi, b, Partition::default_min_gap(lo, hi));
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace dbn::oracle
