// Command-line experiment runner.

#include "dbn/diagnostics.hpp"
#include "dbn/errors.hpp"
#include "dbn/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

/// Flags shared by the experiment subcommands; values stay as strings so they
/// go through the same parser as config-file entries.
struct CommonFlags {
    std::string config;
    std::vector<std::pair<std::string, std::string>> given;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_nu = true) {
    cmd->add_option("--config", flags.config, "key = value configuration file");
    auto add = [&](const std::string& name, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            name, [&flags, key](const std::string& v) { flags.given.emplace_back(key, v); }, help);
    };
    add("--problem", "problem", "ls_sqrt | dr_exp_bump | dr_singular");
    add("--n", "n", "number of neurons");
    add("--method", "method", "dbn | dbgn | bfgs | adbn");
    add("--iters", "iters", "iteration budget");
    add("--gamma", "gamma", "boundary penalty");
    add("--eps-stop", "eps_stop", "adaptive stopping tolerance on the relative estimator");
    add("--quad-order", "quad_order", "Gauss-Legendre nodes per subinterval");
    add("--seed", "seed", "random seed");
    add("--out", "out", "output directory");
    if (with_nu) add("--nu", "nu", "singular-perturbation parameter eps^2");
    cmd->add_option("--set", flags.overrides, "extra key=value settings");
}

dbn::ExperimentConfig build_config(const CommonFlags& flags, dbn::ExperimentConfig cfg) {
    if (!flags.config.empty())
        for (const auto& [k, v] : dbn::read_config_file(flags.config)) cfg.set(k, v);
    for (const auto& kv : flags.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw dbn::ConfigError("set", "expected key=value, got " + kv);
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [k, v] : flags.given) cfg.set(k, v);
    return cfg;
}

int run_single(const dbn::ExperimentConfig& cfg) {
    const dbn::ExperimentResult res = dbn::run_experiment(cfg);
    dbn::write_outputs(res, cfg.out);
    std::cout << res.summary_line() << '\n';
    for (const auto& w : res.trace.warnings) std::cerr << "warning: " << w << '\n';
    return res.trace.status.rfind("aborted", 0) == 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shallow ReLU network solvers: least-squares fitting and diffusion-reaction"};
    app.require_subcommand(1);

    CommonFlags fit_flags, dr_flags, adapt_flags, sweep_flags;
    auto* fit = app.add_subcommand("fit-ls", "least-squares fit of a registered target");
    add_common(fit, fit_flags);
    auto* dr = app.add_subcommand("solve-dr", "fixed-size diffusion-reaction solve");
    add_common(dr, dr_flags);
    auto* adapt = app.add_subcommand("adapt", "adaptive (AdBN) diffusion-reaction solve");
    add_common(adapt, adapt_flags);
    auto* sweep = app.add_subcommand("sweep-nu", "dBN over a range of singular-perturbation nu");
    add_common(sweep, sweep_flags, false);
    std::vector<double> nus{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    sweep->add_option("--nus", nus, "values of nu");

    auto* cond = app.add_subcommand("condition", "condition numbers of dense NN Gram matrices");
    std::string kind = "mass";
    std::vector<std::size_t> sizes{8, 16, 32};
    std::string cond_out;
    cond->add_option("--kind", kind, "mass | stiffness");
    cond->add_option("--n", sizes, "matrix sizes (uniform partitions on (0,1))");
    cond->add_option("--out", cond_out, "directory for condition.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) {
            dbn::ExperimentConfig base;
            base.problem = "ls_sqrt";
            base.out = "out/fit-ls";
            const auto cfg = build_config(fit_flags, base);
            if (dbn::make_problem(cfg.problem, cfg.nu, cfg.gamma).kind !=
                dbn::ProblemKind::least_squares)
                throw dbn::ConfigError("problem", "fit-ls needs a least-squares problem");
            return run_single(cfg);
        }
        if (*dr || *adapt) {
            dbn::ExperimentConfig base;
            base.problem = "dr_exp_bump";
            base.n = *adapt ? 20 : 22;
            base.iters = *adapt ? 2000 : 500;
            base.method = *adapt ? dbn::Method::adbn : dbn::Method::dbn;
            base.out = *adapt ? "out/adapt" : "out/solve-dr";
            const auto cfg = build_config(*adapt ? adapt_flags : dr_flags, base);
            if (dbn::make_problem(cfg.problem, cfg.nu, cfg.gamma).kind !=
                dbn::ProblemKind::diffusion_reaction)
                throw dbn::ConfigError("problem", "needs a diffusion-reaction problem");
            if (*adapt && cfg.method != dbn::Method::adbn)
                throw dbn::ConfigError("method", "adapt runs adbn only");
            if (*dr && cfg.method == dbn::Method::adbn)
                throw dbn::ConfigError("method", "use the adapt subcommand for adbn");
            return run_single(cfg);
        }
        if (*sweep) {
            dbn::ExperimentConfig base;
            base.problem = "dr_singular";
            base.n = 32;
            base.iters = 200;
            base.out = "out/sweep-nu";
            const auto cfg = build_config(sweep_flags, base);
            const auto rows = dbn::run_nu_sweep(cfg, nus, true);
            for (const auto& r : rows)
                std::cout << "nu=" << dbn::format_double(r.nu)
                          << " e_initial=" << dbn::format_double(r.e_initial)
                          << " e_final=" << dbn::format_double(r.e_final)
                          << " l2=" << dbn::format_double(r.l2_final) << '\n';
            return 0;
        }
        if (*cond) {
            const dbn::MatrixKind k = dbn::parse_matrix_kind(kind);
            std::optional<std::ofstream> csv;
            if (!cond_out.empty()) {
                std::filesystem::create_directories(cond_out);
                csv.emplace(std::filesystem::path(cond_out) / "condition.csv");
                *csv << "kind,n,kappa\n";
            }
            double prev = 0.0;
            for (std::size_t n : sizes) {
                const double kappa = dbn::measure_condition(k, n);
                std::cout << "kind=" << kind << " n=" << n << " kappa=" << dbn::format_double(kappa);
                if (prev > 0.0) std::cout << " ratio=" << dbn::format_double(kappa / prev);
                std::cout << '\n';
                if (csv) *csv << kind << ',' << n << ',' << dbn::format_double(kappa) << '\n';
                prev = kappa;
            }
            return 0;
        }
    } catch (const dbn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
