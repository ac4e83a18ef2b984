#include "dbn/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace dbn {

ShallowReLUNet::ShallowReLUNet(double c0, std::vector<double> c, Partition p)
    : c0_(c0), c_(std::move(c)), p_(std::move(p)) {
    if (c_.size() != p_.size())
        throw std::invalid_argument("ShallowReLUNet: weight count must match breakpoint count");
    rebuild();
}

ShallowReLUNet ShallowReLUNet::uniform(double c0, std::size_t n, double x_lo, double x_hi) {
    return ShallowReLUNet(c0, std::vector<double>(n, 0.0), Partition::make_uniform(n, x_lo, x_hi));
}

ShallowReLUNet ShallowReLUNet::with_weights(std::vector<double> c) const {
    return ShallowReLUNet(c0_, std::move(c), p_);
}

ShallowReLUNet ShallowReLUNet::with_partition(Partition p) const {
    return ShallowReLUNet(c0_, c_, std::move(p));
}

void ShallowReLUNet::rebuild() {
    const std::size_t n = c_.size();
    values_.assign(n + 2, 0.0);
    slopes_.assign(n + 1, 0.0);
    values_[0] = c0_;
    double slope = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        if (k > 0) slope += c_[k - 1];
        slopes_[k] = slope;
        values_[k + 1] = values_[k] + slope * (p_.node_right(k) - p_.node(k));
    }
}

std::size_t ShallowReLUNet::interval_of(double x) const {
    const auto b = p_.breakpoints();
    return static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), x) - b.begin());
}

double ShallowReLUNet::operator()(double x) const {
    if (x <= p_.x_lo()) return c0_;
    return value_on(interval_of(x), x);
}

double ShallowReLUNet::derivative(double x) const { return slopes_[interval_of(x)]; }

std::vector<double> ShallowReLUNet::breakpoint_values() const {
    return std::vector<double>(values_.begin() + 1, values_.end() - 1);
}

}  // namespace dbn
