#pragma once

#include "dbn/block_newton.hpp"
#include "dbn/free_knot.hpp"

#include <functional>
#include <span>
#include <vector>

namespace dbn {

struct BfgsConfig {
    int max_iters = 1000;
    /// Stop when ||grad||_inf <= gtol.
    double gtol = 1e-5;
    /// Strong Wolfe constants.
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_search = 40;
};

struct BfgsResult {
    IterTrace trace;
    std::vector<double> x;
};

/// f(x) with gradient written into the second argument.
using ValueAndGradient = std::function<double(std::span<const double>, std::span<double>)>;

/// Inverse-Hessian BFGS (H_0 = I) with a strong-Wolfe line search.
/// `observer`, when set, is called after every accepted iterate and may fill
/// the record's e_n field.
BfgsResult minimize_bfgs(const ValueAndGradient& fg, std::vector<double> x0, const BfgsConfig& cfg,
                         const std::function<void(std::span<const double>, IterRecord&)>& observer = {});

/// BFGS on the joint (c, b) parameter of a free-knot objective.
BfgsResult run_bfgs_baseline(const FreeKnotObjective& obj, const ShallowReLUNet& net0,
                             const BfgsConfig& cfg);

}  // namespace dbn
