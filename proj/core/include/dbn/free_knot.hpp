#pragma once

#include "dbn/models.hpp"

#include <optional>
#include <span>
#include <vector>

namespace dbn {

/// Piecewise-linear form of c0 + sum c_i relu(x - b_i) on [lo, hi] for
/// arbitrary, possibly unordered or out-of-range breakpoints.
struct FreeKnotShape {
    double lo = 0.0;
    double hi = 1.0;
    /// lo, the in-range breakpoints in ascending order, hi.
    std::vector<double> nodes;
    std::vector<double> values;
    /// Slope on [nodes[k], nodes[k+1]].
    std::vector<double> slopes;
    /// Neuron index of each in-range breakpoint (nodes[m+1] belongs to neuron order[m]).
    std::vector<std::size_t> order;

    double value_on(std::size_t k, double x) const { return values[k] + slopes[k] * (x - nodes[k]); }
    std::size_t intervals() const noexcept { return slopes.size(); }
};

FreeKnotShape build_free_knot_shape(double c0, std::span<const double> c,
                                    std::span<const double> b, double lo, double hi);

/// Loss over the joint parameter x = (c_1..c_n, b_1..b_n) without any
/// ordering or range restriction on b.
class FreeKnotObjective {
public:
    virtual ~FreeKnotObjective() = default;
    /// Returns J(x) and writes the gradient into `grad` (size 2n).
    virtual double value_and_gradient(std::span<const double> x, std::span<double> grad) const = 0;
    virtual double value(std::span<const double> x) const;
    virtual std::optional<double> rel_error(std::span<const double>) const { return std::nullopt; }
    virtual double x_lo() const = 0;
    virtual double x_hi() const = 0;
    virtual double c0() const = 0;
};

class LSFreeKnot : public FreeKnotObjective {
public:
    LSFreeKnot(LSProblem prob, IntegrationPlan plan) : prob_(std::move(prob)), plan_(std::move(plan)) {}
    double value_and_gradient(std::span<const double> x, std::span<double> grad) const override;
    double x_lo() const override { return prob_.x_lo; }
    double x_hi() const override { return prob_.x_hi; }
    double c0() const override { return prob_.f(prob_.x_lo); }

private:
    LSProblem prob_;
    IntegrationPlan plan_;
};

class DRFreeKnot : public FreeKnotObjective {
public:
    DRFreeKnot(DRProblem prob, IntegrationPlan plan,
               std::optional<ScalarField> exact_derivative = std::nullopt);
    double value_and_gradient(std::span<const double> x, std::span<double> grad) const override;
    std::optional<double> rel_error(std::span<const double> x) const override;
    double x_lo() const override { return prob_.x_lo; }
    double x_hi() const override { return prob_.x_hi; }
    double c0() const override { return prob_.alpha_bc; }

private:
    DRProblem prob_;
    IntegrationPlan plan_;
    std::optional<ScalarField> exact_derivative_;
    IntegrationPlan error_plan_;
};

/// Packs (c, b) of a network into a joint parameter vector.
std::vector<double> pack_parameters(const ShallowReLUNet& net);

}  // namespace dbn
