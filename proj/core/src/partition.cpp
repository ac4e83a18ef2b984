#include "dbn/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dbn {

namespace {

// Slack for the gap floor so that projected partitions survive round-off.
double gap_slack(double x_lo, double x_hi) { return 1e-12 * (x_hi - x_lo); }

}  // namespace

std::string Partition::check_invariants(double x_lo, double x_hi, std::span<const double> b,
                                        double min_gap, bool anchored) {
    std::ostringstream why;
    if (!(x_lo < x_hi)) {
        why << "degenerate interval [" << x_lo << ", " << x_hi << "]";
        return why.str();
    }
    if (!(min_gap > 0.0)) {
        why << "min_gap must be positive";
        return why.str();
    }
    const double floor = min_gap - gap_slack(x_lo, x_hi);
    if (anchored && (b.empty() || b[0] != x_lo)) return "anchored partition must start at x_lo";
    double prev = x_lo;
    for (std::size_t i = anchored ? 1 : 0; i <= b.size(); ++i) {
        const double next = i < b.size() ? b[i] : x_hi;
        if (!std::isfinite(next)) {
            why << "breakpoint " << i << " is not finite";
            return why.str();
        }
        if (!(next > prev) || next - prev < floor) {
            why << "gap " << i << " = " << next - prev << " below min_gap " << min_gap;
            return why.str();
        }
        prev = next;
    }
    return {};
}

Partition::Partition(double x_lo, double x_hi, std::vector<double> breakpoints, double min_gap,
                     bool anchored)
    : x_lo_(x_lo), x_hi_(x_hi), min_gap_(min_gap), anchored_(anchored), b_(std::move(breakpoints)) {
    if (b_.empty()) throw std::invalid_argument("partition needs at least one breakpoint");
    if (auto why = check_invariants(x_lo_, x_hi_, b_, min_gap_, anchored_); !why.empty())
        throw std::invalid_argument("invalid partition: " + why);
    build_gaps();
}

void Partition::build_gaps() {
    h_.resize(b_.size() + 1);
    double prev = x_lo_;
    for (std::size_t i = 0; i < b_.size(); ++i) {
        h_[i] = b_[i] - prev;
        prev = b_[i];
    }
    h_.back() = x_hi_ - prev;
}

Partition Partition::make_uniform(std::size_t n, double x_lo, double x_hi) {
    if (!(x_lo < x_hi)) throw std::invalid_argument("make_uniform: degenerate interval");
    return make_uniform(n, x_lo, x_hi, default_min_gap(x_lo, x_hi));
}

Partition Partition::make_uniform(std::size_t n, double x_lo, double x_hi, double min_gap) {
    if (n == 0) throw std::invalid_argument("make_uniform: n must be positive");
    if (!(x_lo < x_hi)) throw std::invalid_argument("make_uniform: degenerate interval");
    const double step = (x_hi - x_lo) / static_cast<double>(n + 1);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = x_lo + static_cast<double>(i + 1) * step;
    Partition p;
    p.x_lo_ = x_lo;
    p.x_hi_ = x_hi;
    p.min_gap_ = min_gap;
    p.b_ = std::move(b);
    p.h_.assign(n + 1, step);
    return p;
}

Partition Partition::project_ordered(std::span<const double> raw, double x_lo, double x_hi,
                                     double min_gap) {
    const std::size_t n = raw.size();
    if (n == 0) throw std::invalid_argument("project_ordered: empty breakpoint vector");
    if (!(x_lo < x_hi)) throw std::invalid_argument("project_ordered: degenerate interval");
    if (!(min_gap > 0.0) || min_gap * static_cast<double>(n + 1) >= x_hi - x_lo)
        throw std::invalid_argument("project_ordered: infeasible min_gap for n breakpoints");
    for (double v : raw)
        if (!std::isfinite(v)) throw std::invalid_argument("project_ordered: non-finite input");

    if (check_invariants(x_lo, x_hi, raw, min_gap).empty())
        return Partition(x_lo, x_hi, std::vector<double>(raw.begin(), raw.end()), min_gap);

    std::vector<double> s(raw.begin(), raw.end());
    if (!std::is_sorted(s.begin(), s.end())) std::stable_sort(s.begin(), s.end());

    // z_i = s_i - (i+1) g must be non-decreasing; pool adjacent violators.
    std::vector<double> block_mean;
    std::vector<std::size_t> block_size;
    block_mean.reserve(n);
    block_size.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double mean = s[i] - static_cast<double>(i + 1) * min_gap;
        std::size_t size = 1;
        while (!block_mean.empty() && block_mean.back() > mean) {
            const double total = block_mean.back() * static_cast<double>(block_size.back()) +
                                 mean * static_cast<double>(size);
            size += block_size.back();
            mean = total / static_cast<double>(size);
            block_mean.pop_back();
            block_size.pop_back();
        }
        block_mean.push_back(mean);
        block_size.push_back(size);
    }

    const double z_lo = x_lo;
    const double z_hi = x_hi - static_cast<double>(n + 1) * min_gap;
    std::vector<double> b(n);
    std::size_t i = 0;
    for (std::size_t k = 0; k < block_mean.size(); ++k) {
        const double z = std::clamp(block_mean[k], z_lo, z_hi);
        for (std::size_t j = 0; j < block_size[k]; ++j, ++i)
            b[i] = z + static_cast<double>(i + 1) * min_gap;
    }
    // Round-off can leave a gap a hair under the floor; sweep once to repair.
    for (std::size_t j = 1; j < n; ++j) b[j] = std::max(b[j], b[j - 1] + min_gap);
    Partition p;
    p.x_lo_ = x_lo;
    p.x_hi_ = x_hi;
    p.min_gap_ = min_gap;
    p.b_ = std::move(b);
    p.build_gaps();
    return p;
}

Partition Partition::project_ordered(std::span<const double> raw, double x_lo, double x_hi,
                                     double min_gap, bool anchored) {
    if (!anchored) return project_ordered(raw, x_lo, x_hi, min_gap);
    if (raw.empty()) throw std::invalid_argument("project_ordered: empty breakpoint vector");
    std::vector<double> b{x_lo};
    if (raw.size() > 1) {
        const Partition free = project_ordered(raw.subspan(1), x_lo, x_hi, min_gap);
        b.insert(b.end(), free.b_.begin(), free.b_.end());
    }
    return Partition(x_lo, x_hi, std::move(b), min_gap, true);
}

Partition Partition::anchored_from(const Partition& interior) {
    std::vector<double> b{interior.x_lo_};
    b.insert(b.end(), interior.b_.begin() + static_cast<std::ptrdiff_t>(interior.first_free()),
             interior.b_.end());
    return Partition(interior.x_lo_, interior.x_hi_, std::move(b), interior.min_gap_, true);
}

Partition Partition::make_anchored_uniform(std::size_t n, double x_lo, double x_hi) {
    if (n == 0) throw std::invalid_argument("make_anchored_uniform: n must be positive");
    if (!(x_lo < x_hi)) throw std::invalid_argument("make_anchored_uniform: degenerate interval");
    if (n == 1)
        return Partition(x_lo, x_hi, {x_lo}, default_min_gap(x_lo, x_hi), true);
    return anchored_from(make_uniform(n - 1, x_lo, x_hi));
}

double Partition::h_min() const {
    return *std::min_element(h_.begin() + static_cast<std::ptrdiff_t>(first_free()), h_.end());
}
double Partition::h_max() const { return *std::max_element(h_.begin(), h_.end()); }

}  // namespace dbn
