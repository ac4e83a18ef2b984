#include "dbn/diagnostics.hpp"

#include "dbn/adaptivity.hpp"
#include "dbn/dense.hpp"
#include "dbn/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace dbn {

MatrixKind parse_matrix_kind(const std::string& name) {
    if (name == "mass") return MatrixKind::mass;
    if (name == "stiffness") return MatrixKind::stiffness;
    throw ConfigError("kind", "unknown matrix kind '" + name + "' (expected mass or stiffness)");
}

double measure_condition(MatrixKind kind, std::size_t n, double x_lo, double x_hi) {
    if (n == 0) throw ConfigError("n", "must be positive");
    const Partition p = Partition::make_uniform(n, x_lo, x_hi);
    const IntegrationPlan plan;
    const ScalarField one = ScalarField::constant(1.0);
    const Eigen::MatrixXd m =
        kind == MatrixKind::mass ? dense_mass(one, p, plan) : dense_stiffness(one, p, plan);
    if (n == 1) return 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

double rate_report(const IterTrace& trace) {
    if (trace.records.empty()) return std::numeric_limits<double>::quiet_NaN();
    const IterRecord& last = trace.records.back();
    return convergence_rate(last.e_n, last.n);
}

}  // namespace dbn
