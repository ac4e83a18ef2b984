#pragma once

#include "dbn/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dbn {

enum class ProblemKind { least_squares, diffusion_reaction };

/// A registered benchmark: coefficients, boundary data and (when known) the
/// exact solution with its first and second derivatives.
struct ProblemEntry {
    std::string id;
    ProblemKind kind = ProblemKind::diffusion_reaction;
    double nu = 0.0;
    LSProblem ls;
    DRProblem dr;
    std::optional<ScalarField> u_exact;
    std::optional<ScalarField> du_exact;
    /// Set once the entry has been mapped to (0, 1).
    std::optional<CoordinateMap> unit_map;
};

/// Known ids: ls_sqrt, dr_exp_bump, dr_singular (parameter nu = eps^2; the
/// form "dr_singular:1e-4" is also accepted). Throws ConfigError otherwise.
ProblemEntry make_problem(const std::string& id, double nu = 1e-4, double gamma = 1e4);

std::vector<std::string> problem_ids();

/// Restates a diffusion-reaction entry on (0, 1), mapping the exact solution
/// as well; least-squares entries and entries already on (0, 1) are returned as is.
ProblemEntry map_to_unit(const ProblemEntry& entry);

/// Largest |-(a u')' + r u - f| over `samples` interior points, with u''
/// taken by a five-point difference of the exact u'. Zero for entries without
/// an exact solution or for least-squares entries.
double registry_self_test(const ProblemEntry& entry, int samples = 100);

}  // namespace dbn
