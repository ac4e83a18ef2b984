#pragma once

#include "dbn/block_newton.hpp"

#include <cstddef>
#include <string>

namespace dbn {

enum class MatrixKind { mass, stiffness };

/// Throws ConfigError for names other than "mass" and "stiffness".
MatrixKind parse_matrix_kind(const std::string& name);

/// Spectral condition number of the dense NN mass (r = 1) or stiffness (a = 1)
/// matrix on a uniform partition, from a symmetric eigen-decomposition.
double measure_condition(MatrixKind kind, std::size_t n, double x_lo = 0.0, double x_hi = 1.0);

/// r = ln(1/e_n) / ln(n) from the last record; NaN when e_n >= 1, e_n is
/// unknown, or n < 2.
double rate_report(const IterTrace& trace);

}  // namespace dbn
