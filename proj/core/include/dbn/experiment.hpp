#pragma once

#include "dbn/adaptivity.hpp"
#include "dbn/block_newton.hpp"
#include "dbn/problems.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dbn {

/// Everything needed to reproduce one run.
///
/// Config files are flat `key = value` lines; `#` starts a comment, blank
/// lines are ignored, and `-` and `_` are interchangeable in keys.
struct ExperimentConfig {
    std::string problem = "ls_sqrt";
    double nu = 1e-4;
    /// Neuron count. With `anchor` this includes the neuron pinned at x_lo,
    /// so the uniform start has n equal subintervals.
    std::size_t n = 20;
    Method method = Method::dbn;
    int iters = 100;
    double gamma = 1e4;
    double eps_stop = 0.05;
    int quad_order = 5;
    std::uint64_t seed = 0;
    std::string out = "out";
    /// AdBN: dBN iterations per network size before refining regardless.
    int max_iters_per_level = 100;
    /// Uniform random shift of each initial breakpoint, as a fraction of the gap.
    double init_jitter = 0.0;
    double grad_tol = 0.0;
    double bfgs_gtol = 1e-5;
    bool literal_rhs = false;
    bool map_to_unit = true;
    bool anchor = true;
    ResidualForm residual_form = ResidualForm::as_published;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// Applies one key=value setting; throws ConfigError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
};

/// Parses a config file into ordered key/value pairs (keys normalised to `_`).
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

struct ExperimentResult {
    ExperimentConfig config;
    IterTrace trace;
    std::vector<double> b_final;
    /// Ordered summary fields; rendered as one key=value line.
    std::vector<std::pair<std::string, std::string>> summary;

    std::string summary_line() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// trace.csv, summary.txt, b_final.csv and, for adaptive runs, refinements.csv.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// The header line of trace.csv.
inline constexpr const char* kTraceHeader = "iter,J,e_n,grad_norm,eta,n,wall_ms";

std::string format_double(double v);

struct SweepRow {
    double nu = 0.0;
    double e_initial = 0.0;
    double e_final = 0.0;
    double l2_final = 0.0;
};

/// Runs the singular-perturbation family for each nu; each run writes into
/// `<out>/nu_<value>/` and a sweep.csv table is written to `<out>`.
std::vector<SweepRow> run_nu_sweep(const ExperimentConfig& base, const std::vector<double>& nus,
                                   bool write_files);

}  // namespace dbn
