#include "dbn/problems.hpp"

#include "dbn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dbn {

namespace {

ProblemEntry make_ls_sqrt() {
    ProblemEntry e;
    e.id = "ls_sqrt";
    e.kind = ProblemKind::least_squares;
    e.ls.f = ScalarField([](double x) { return std::sqrt(std::max(x, 0.0)); });
    e.ls.r = ScalarField::constant(1.0);
    e.ls.x_lo = 0.0;
    e.ls.x_hi = 1.0;
    e.ls.features = {{0.0, 1e-4}};
    e.u_exact = e.ls.f;
    return e;
}

ProblemEntry make_exp_bump(double gamma) {
    constexpr double center = 1.0 / 3.0;
    constexpr double width2 = 0.01;
    const double k = std::exp(-4.0 / (9.0 * width2));
    auto bump = [=](double x) { return std::exp(-(x - center) * (x - center) / width2); };
    auto u = [=](double x) { return x * (bump(x) - k); };
    auto du = [=](double x) {
        const double e = bump(x);
        return e - k + x * (-2.0 * (x - center) / width2) * e;
    };
    auto d2u = [=](double x) {
        const double e = bump(x);
        const double d = x - center;
        const double e1 = -2.0 * d / width2 * e;
        const double e2 = (-2.0 / width2 + 4.0 * d * d / (width2 * width2)) * e;
        return 2.0 * e1 + x * e2;
    };
    ProblemEntry e;
    e.id = "dr_exp_bump";
    e.kind = ProblemKind::diffusion_reaction;
    e.dr.a = ScalarField::constant(1.0);
    e.dr.r = ScalarField::constant(1.0);
    e.dr.f = ScalarField([=](double x) { return -d2u(x) + u(x); });
    e.dr.alpha_bc = 0.0;
    e.dr.beta_bc = 0.0;
    e.dr.gamma = gamma;
    e.dr.x_lo = 0.0;
    e.dr.x_hi = 1.0;
    e.dr.features = {{center, 0.1}};
    e.u_exact = ScalarField(u, du);
    e.du_exact = ScalarField(du, d2u);
    return e;
}

ProblemEntry make_singular(double nu, double gamma) {
    if (!(nu > 0.0)) throw ConfigError("nu", "must be positive");
    const double eps = std::sqrt(nu);
    const double shift = std::tanh(0.75 / eps);
    auto s = [=](double x) { return (x * x - 0.25) / eps; };
    auto sech2 = [](double z) {
        const double c = std::cosh(z);
        return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
    };
    auto u = [=](double x) { return std::tanh(s(x)) - shift; };
    auto du = [=](double x) { return 2.0 * x / eps * sech2(s(x)); };
    auto d2u = [=](double x) {
        const double z = s(x);
        return 2.0 / eps * sech2(z) - 8.0 * x * x / (eps * eps) * sech2(z) * std::tanh(z);
    };
    ProblemEntry e;
    e.id = "dr_singular";
    e.kind = ProblemKind::diffusion_reaction;
    e.nu = nu;
    e.dr.a = ScalarField::constant(nu);
    e.dr.r = ScalarField::constant(1.0);
    e.dr.f = ScalarField([=](double x) {
        const double z = s(x);
        return -2.0 * (eps - 4.0 * x * x * std::tanh(z)) * sech2(z) + std::tanh(z) - shift;
    });
    e.dr.alpha_bc = 0.0;
    e.dr.beta_bc = 0.0;
    e.dr.gamma = gamma;
    e.dr.x_lo = -1.0;
    e.dr.x_hi = 1.0;
    e.dr.features = {{-0.5, eps}, {0.5, eps}};
    e.u_exact = ScalarField(u, du);
    e.du_exact = ScalarField(du, d2u);
    return e;
}

}  // namespace

ProblemEntry make_problem(const std::string& id, double nu, double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("gamma", "must be positive");
    if (id == "ls_sqrt") return make_ls_sqrt();
    if (id == "dr_exp_bump") return make_exp_bump(gamma);
    if (id == "dr_singular") return make_singular(nu, gamma);
    const std::string prefix = "dr_singular:";
    if (id.rfind(prefix, 0) == 0) {
        double parsed = 0.0;
        try {
            parsed = std::stod(id.substr(prefix.size()));
        } catch (const std::exception&) {
            throw ConfigError("problem", "cannot parse nu in '" + id + "'");
        }
        return make_singular(parsed, gamma);
    }
    throw ConfigError("problem", "unknown problem '" + id + "' (expected ls_sqrt, dr_exp_bump, "
                                 "dr_singular)");
}

std::vector<std::string> problem_ids() { return {"ls_sqrt", "dr_exp_bump", "dr_singular"}; }

ProblemEntry map_to_unit(const ProblemEntry& entry) {
    if (entry.kind != ProblemKind::diffusion_reaction || entry.unit_map) return entry;
    ProblemEntry out = entry;
    UnitProblem up = to_unit_problem(entry.dr);
    out.dr = std::move(up.problem);
    out.unit_map = up.map;
    if (entry.u_exact) out.u_exact = pull_back(*entry.u_exact, up.map);
    if (entry.du_exact) out.du_exact = pull_back(*entry.du_exact, up.map, up.map.length);
    return out;
}

double registry_self_test(const ProblemEntry& entry, int samples) {
    if (entry.kind != ProblemKind::diffusion_reaction || !entry.du_exact || !entry.u_exact)
        return 0.0;
    const DRProblem& p = entry.dr;
    const ScalarField& u = *entry.u_exact;
    const ScalarField& du = *entry.du_exact;
    double scale = p.x_hi - p.x_lo;
    for (const Feature& f : p.features)
        if (f.width > 0.0) scale = std::min(scale, f.width);
    const double h = 1e-3 * scale;
    double worst = 0.0;
    for (int i = 1; i <= samples; ++i) {
        const double x = p.x_lo + (p.x_hi - p.x_lo) * i / (samples + 1.0);
        const double d2 =
            (-du(x + 2 * h) + 8.0 * du(x + h) - 8.0 * du(x - h) + du(x - 2 * h)) / (12.0 * h);
        const double a = p.a(x);
        const double da = p.a.derivative(x, 1e-6 * (p.x_hi - p.x_lo));
        const double residual = -(da * du(x) + a * d2) + p.r(x) * u(x) - p.f(x);
        worst = std::max(worst, std::abs(residual));
    }
    return worst;
}

}  // namespace dbn
