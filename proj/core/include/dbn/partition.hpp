#pragma once

#include <span>
#include <string>
#include <vector>

namespace dbn {

/// Ordered interior breakpoints x_lo < b_1 < ... < b_n < x_hi.
///
/// The gap vector has n+1 entries: h[0] = b_1 - x_lo, h[i] = b_{i+1} - b_i,
/// h[n] = x_hi - b_n. Instances are immutable; every "update" produces a
/// new value through project_ordered.
///
/// An anchored partition pins b_1 = x_lo (so h[0] = 0 and I_0 is empty).
/// The neuron sitting on the left endpoint carries a slope on the whole
/// domain; only b_2..b_n move.
class Partition {
public:
    /// Validates the ordering and gap invariants; throws std::invalid_argument.
    Partition(double x_lo, double x_hi, std::vector<double> breakpoints, double min_gap,
              bool anchored = false);

    static Partition make_uniform(std::size_t n, double x_lo, double x_hi);
    static Partition make_uniform(std::size_t n, double x_lo, double x_hi, double min_gap);

    /// Nearest admissible partition to an arbitrary vector of n breakpoints.
    ///
    /// Sorts the input, then solves the bounded isotonic projection
    ///   min |b - raw|_2  s.t.  b_{i+1} - b_i >= min_gap,  x_lo + min_gap <= b_1,
    ///                           b_n <= x_hi - min_gap
    /// by pool-adjacent-violators on b_i - i*min_gap followed by clipping.
    /// Ties are split symmetrically; admissible input is returned unchanged.
    static Partition project_ordered(std::span<const double> raw, double x_lo, double x_hi,
                                     double min_gap);

    /// Admissible partition with b_1 = x_lo; raw[0] is ignored.
    static Partition project_ordered(std::span<const double> raw, double x_lo, double x_hi,
                                     double min_gap, bool anchored);

    /// Prepends the pinned breakpoint x_lo to an ordinary partition.
    static Partition anchored_from(const Partition& interior);
    /// Anchor plus n - 1 equispaced interior breakpoints, all n gaps equal.
    static Partition make_anchored_uniform(std::size_t n, double x_lo, double x_hi);

    static double default_min_gap(double x_lo, double x_hi) { return 1e-8 * (x_hi - x_lo); }

    std::size_t size() const noexcept { return b_.size(); }
    double x_lo() const noexcept { return x_lo_; }
    double x_hi() const noexcept { return x_hi_; }
    double length() const noexcept { return x_hi_ - x_lo_; }
    double min_gap() const noexcept { return min_gap_; }
    bool anchored() const noexcept { return anchored_; }
    /// Index of the first movable breakpoint (1 when anchored).
    std::size_t first_free() const noexcept { return anchored_ ? 1 : 0; }

    std::span<const double> breakpoints() const noexcept { return b_; }
    std::span<const double> gaps() const noexcept { return h_; }
    double operator[](std::size_t i) const { return b_[i]; }

    /// Left end of subinterval k in 0..n (x_lo for k = 0).
    double node(std::size_t k) const { return k == 0 ? x_lo_ : b_[k - 1]; }
    /// Right end of subinterval k in 0..n (x_hi for k = n).
    double node_right(std::size_t k) const { return k == b_.size() ? x_hi_ : b_[k]; }

    /// Gaps h_1..h_n, i.e. the lengths of [b_i, b_{i+1}] with b_{n+1} = x_hi.
    std::span<const double> neuron_gaps() const noexcept {
        return std::span<const double>(h_).subspan(1);
    }

    /// Extremes over the non-empty subintervals.
    double h_min() const;
    double h_max() const;

    /// Returns an empty string when all invariants hold, else a description.
    static std::string check_invariants(double x_lo, double x_hi, std::span<const double> b,
                                        double min_gap, bool anchored = false);

private:
    Partition() = default;
    void build_gaps();

    double x_lo_ = 0.0;
    double x_hi_ = 1.0;
    double min_gap_ = 0.0;
    bool anchored_ = false;
    std::vector<double> b_;
    std::vector<double> h_;
};

}  // namespace dbn
