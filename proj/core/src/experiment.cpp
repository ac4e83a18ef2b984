#include "dbn/experiment.hpp"

#include "dbn/bfgs.hpp"
#include "dbn/diagnostics.hpp"
#include "dbn/errors.hpp"
#include "dbn/free_knot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

namespace dbn {

namespace {

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, const std::string& v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(field, "expected a number, got '" + v + "'");
    return out;
}

long long parse_int(const std::string& field, const std::string& v) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(field, "expected an integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& field, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(field, "expected a boolean, got '" + v + "'");
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = normalize_key(trim(raw_key));
    const std::string v = trim(raw_value);
    if (key == "problem") {
        problem = v;
    } else if (key == "nu") {
        nu = parse_double(key, v);
    } else if (key == "n") {
        const long long x = parse_int(key, v);
        if (x < 1) throw ConfigError(key, "must be at least 1");
        n = static_cast<std::size_t>(x);
    } else if (key == "method") {
        method = parse_method(v);
    } else if (key == "iters") {
        iters = static_cast<int>(parse_int(key, v));
    } else if (key == "gamma") {
        gamma = parse_double(key, v);
    } else if (key == "eps_stop") {
        eps_stop = parse_double(key, v);
    } else if (key == "quad_order") {
        quad_order = static_cast<int>(parse_int(key, v));
    } else if (key == "seed") {
        const long long x = parse_int(key, v);
        if (x < 0) throw ConfigError(key, "must be non-negative");
        seed = static_cast<std::uint64_t>(x);
    } else if (key == "out") {
        out = v;
    } else if (key == "max_iters_per_level") {
        max_iters_per_level = static_cast<int>(parse_int(key, v));
    } else if (key == "init_jitter") {
        init_jitter = parse_double(key, v);
    } else if (key == "grad_tol") {
        grad_tol = parse_double(key, v);
    } else if (key == "bfgs_gtol") {
        bfgs_gtol = parse_double(key, v);
    } else if (key == "literal_rhs") {
        literal_rhs = parse_bool(key, v);
    } else if (key == "anchor") {
        anchor = parse_bool(key, v);
    } else if (key == "map_to_unit") {
        map_to_unit = parse_bool(key, v);
    } else if (key == "residual_form") {
        if (v == "published") {
            residual_form = ResidualForm::as_published;
        } else if (v == "conventional") {
            residual_form = ResidualForm::conventional;
        } else {
            throw ConfigError(key, "expected published or conventional, got '" + v + "'");
        }
    } else {
        throw ConfigError(key, "unknown configuration key");
    }
}

void ExperimentConfig::validate() const {
    if (n < 1) throw ConfigError("n", "must be at least 1");
    if (iters < 0) throw ConfigError("iters", "must be non-negative");
    if (!(gamma > 0.0)) throw ConfigError("gamma", "must be positive");
    if (!(eps_stop > 0.0)) throw ConfigError("eps_stop", "must be positive");
    if (quad_order < 1 || quad_order > 64) throw ConfigError("quad_order", "must lie in [1, 64]");
    if (!(nu > 0.0)) throw ConfigError("nu", "must be positive");
    if (max_iters_per_level < 1) throw ConfigError("max_iters_per_level", "must be positive");
    if (!(init_jitter >= 0.0 && init_jitter < 0.5))
        throw ConfigError("init_jitter", "must lie in [0, 0.5)");
    if (grad_tol < 0.0) throw ConfigError("grad_tol", "must be non-negative");
    if (!(bfgs_gtol >= 0.0)) throw ConfigError("bfgs_gtol", "must be non-negative");
    if (out.empty()) throw ConfigError("out", "must not be empty");
    // Resolves the problem id, raising ConfigError("problem", ...) when unknown.
    const ProblemEntry entry = make_problem(problem, nu, gamma);
    if (entry.kind == ProblemKind::least_squares && method == Method::adbn)
        throw ConfigError("method", "adbn applies to diffusion-reaction problems only");
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config", "line " + std::to_string(lineno) + ": expected key = value");
        out.emplace_back(normalize_key(trim(line.substr(0, eq))), trim(line.substr(eq + 1)));
    }
    return out;
}

std::string ExperimentResult::summary_line() const {
    std::string s;
    for (const auto& [k, v] : summary) {
        if (!s.empty()) s += ' ';
        s += k + "=" + v;
    }
    return s;
}

namespace {

ShallowReLUNet initial_net(const ExperimentConfig& cfg, double c0, double lo, double hi) {
    Partition p = cfg.anchor ? Partition::make_anchored_uniform(cfg.n, lo, hi)
                             : Partition::make_uniform(cfg.n, lo, hi);
    if (cfg.init_jitter > 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> dist(-cfg.init_jitter, cfg.init_jitter);
        const double h = p.h_max();
        std::vector<double> b(p.breakpoints().begin(), p.breakpoints().end());
        for (std::size_t i = p.first_free(); i < b.size(); ++i) b[i] += dist(rng) * h;
        p = Partition::project_ordered(b, lo, hi, Partition::default_min_gap(lo, hi), cfg.anchor);
    }
    return ShallowReLUNet(c0, std::vector<double>(cfg.n, 0.0), std::move(p));
}

std::vector<double> sorted_breakpoints(std::span<const double> x) {
    const std::size_t n = x.size() / 2;
    std::vector<double> b(x.begin() + n, x.end());
    std::sort(b.begin(), b.end());
    return b;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    ProblemEntry entry = make_problem(cfg.problem, cfg.nu, cfg.gamma);
    if (entry.kind == ProblemKind::diffusion_reaction && cfg.map_to_unit) entry = map_to_unit(entry);
    const bool is_ls = entry.kind == ProblemKind::least_squares;
    const double lo = is_ls ? entry.ls.x_lo : entry.dr.x_lo;
    const double hi = is_ls ? entry.ls.x_hi : entry.dr.x_hi;
    entry.dr.literal_rhs = cfg.literal_rhs;
    const auto& features = is_ls ? entry.ls.features : entry.dr.features;
    const IntegrationPlan plan = IntegrationPlan::with_features(
        QuadratureRule::gauss_legendre(cfg.quad_order), features, lo, hi);

    SolverConfig scfg;
    scfg.max_iters = cfg.iters;
    scfg.method = cfg.method;
    scfg.grad_tol = cfg.grad_tol;

    std::optional<ShallowReLUNet> final_net;
    double l2 = std::numeric_limits<double>::quiet_NaN();
    std::unique_ptr<BlockObjective> obj;
    if (is_ls) {
        obj = std::make_unique<LSObjective>(entry.ls, plan);
    } else {
        obj = std::make_unique<DRObjective>(entry.dr, plan, entry.du_exact);
    }
    const ShallowReLUNet net0 = initial_net(cfg, obj->c0(), lo, hi);

    if (cfg.method == Method::bfgs) {
        const ShallowReLUNet start = net0.with_weights(obj->solve_linear(net0.partition()));
        BfgsConfig bcfg;
        bcfg.max_iters = cfg.iters;
        bcfg.gtol = cfg.bfgs_gtol;
        BfgsResult br;
        if (is_ls) {
            br = run_bfgs_baseline(LSFreeKnot(entry.ls, plan), start, bcfg);
        } else {
            br = run_bfgs_baseline(DRFreeKnot(entry.dr, plan, entry.du_exact), start, bcfg);
        }
        res.trace = std::move(br.trace);
        res.b_final = sorted_breakpoints(br.x);
    } else if (cfg.method == Method::adbn) {
        AdaptiveConfig acfg;
        acfg.solver = scfg;
        acfg.eps_stop = cfg.eps_stop;
        acfg.max_iters_per_level = cfg.max_iters_per_level;
        acfg.residual_form = cfg.residual_form;
        res.trace = run_adbn(static_cast<const DRObjective&>(*obj), net0, acfg);
    } else {
        res.trace = run_block_solver(*obj, net0, scfg);
    }
    if (res.trace.final_net) {
        const auto b = res.trace.final_net->partition().breakpoints();
        res.b_final.assign(b.begin(), b.end());
        if (!is_ls && entry.u_exact)
            l2 = l2_rel_error(*res.trace.final_net, *entry.u_exact, error_plan_for(plan));
    }

    if (entry.unit_map)
        for (double& b : res.b_final) b = entry.unit_map->to_physical(b);

    auto& s = res.summary;
    const IterRecord last = res.trace.records.empty() ? IterRecord{} : res.trace.records.back();
    s.emplace_back("problem", entry.id);
    if (entry.id == "dr_singular") s.emplace_back("nu", format_double(cfg.nu));
    s.emplace_back("method", to_string(cfg.method));
    s.emplace_back("n_init", std::to_string(cfg.n));
    s.emplace_back("n", std::to_string(last.n));
    s.emplace_back("iters", std::to_string(last.iter));
    s.emplace_back("J", format_double(last.J));
    s.emplace_back("e_n", format_double(last.e_n));
    s.emplace_back("l2", format_double(l2));
    s.emplace_back("r", format_double(rate_report(res.trace)));
    s.emplace_back("grad_norm", format_double(last.grad_norm));
    std::string history;
    for (const auto& ev : res.trace.refinements) {
        if (!history.empty()) history += '>';
        history += std::to_string(ev.n_before);
    }
    s.emplace_back("refinements", history.empty() ? "none" : history);
    s.emplace_back("status", res.trace.status);
    s.emplace_back("seed", std::to_string(cfg.seed));
    s.emplace_back("wall_ms", format_double(last.wall_ms));
    return res;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "trace.csv");
        f << kTraceHeader << '\n';
        for (const auto& r : result.trace.records)
            f << r.iter << ',' << format_double(r.J) << ',' << format_double(r.e_n) << ','
              << format_double(r.grad_norm) << ',' << format_double(r.eta) << ',' << r.n << ','
              << format_double(r.wall_ms) << '\n';
    }
    {
        std::ofstream f(dir / "summary.txt");
        f << result.summary_line() << '\n';
    }
    {
        std::ofstream f(dir / "b_final.csv");
        for (double b : result.b_final) f << format_double(b) << '\n';
    }
    if (!result.trace.refinements.empty()) {
        std::ofstream f(dir / "refinements.csv");
        f << "n,e_n,xi_n,r\n";
        for (const auto& ev : result.trace.refinements)
            f << ev.n_before << ',' << format_double(ev.e_n) << ','
              << format_double(ev.rel_estimator) << ',' << format_double(ev.rate) << '\n';
    }
    if (!result.trace.warnings.empty()) {
        std::ofstream f(dir / "warnings.txt");
        for (const auto& w : result.trace.warnings) f << w << '\n';
    }
}

std::vector<SweepRow> run_nu_sweep(const ExperimentConfig& base, const std::vector<double>& nus,
                                   bool write_files) {
    std::vector<SweepRow> rows;
    for (double nu : nus) {
        ExperimentConfig cfg = base;
        cfg.problem = "dr_singular";
        cfg.nu = nu;
        const ExperimentResult res = run_experiment(cfg);
        SweepRow row;
        row.nu = nu;
        row.e_initial = res.trace.records.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                  : res.trace.records.front().e_n;
        row.e_final = res.trace.records.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                : res.trace.records.back().e_n;
        row.l2_final = std::numeric_limits<double>::quiet_NaN();
        for (const auto& [k, v] : res.summary)
            if (k == "l2") row.l2_final = v == "nan" ? row.l2_final : std::stod(v);
        rows.push_back(row);
        if (write_files) {
            std::ostringstream name;
            name << "nu_" << nu;
            write_outputs(res, std::filesystem::path(base.out) / name.str());
        }
    }
    if (write_files) {
        std::filesystem::create_directories(base.out);
        std::ofstream f(std::filesystem::path(base.out) / "sweep.csv");
        f << "nu,e_initial,e_final,l2_final\n";
        for (const auto& r : rows)
            f << format_double(r.nu) << ',' << format_double(r.e_initial) << ','
              << format_double(r.e_final) << ',' << format_double(r.l2_final) << '\n';
    }
    return rows;
}

}  // namespace dbn
