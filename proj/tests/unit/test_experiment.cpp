#include "dbn/diagnostics.hpp"
#include "dbn/errors.hpp"
#include "dbn/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace dbn;
namespace fs = std::filesystem;

namespace {

std::string field_of(const std::function<void()>& action) {
    try {
        action();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dbn_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

}  // namespace

TEST(ExperimentConfig, SetParsesAndNormalisesKeys) {
    ExperimentConfig cfg;
    cfg.set("problem", "dr_exp_bump");
    cfg.set("quad-order", "7");
    cfg.set(" eps_stop ", " 0.01 ");
    cfg.set("method", "dbgn");
    cfg.set("anchor", "false");
    cfg.set("residual-form", "conventional");
    EXPECT_EQ(cfg.problem, "dr_exp_bump");
    EXPECT_EQ(cfg.quad_order, 7);
    EXPECT_EQ(cfg.eps_stop, 0.01);
    EXPECT_EQ(cfg.method, Method::dbgn);
    EXPECT_FALSE(cfg.anchor);
    EXPECT_EQ(cfg.residual_form, ResidualForm::conventional);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(ExperimentConfig, ErrorsNameTheField) {
    ExperimentConfig cfg;
    EXPECT_EQ(field_of([&] { cfg.set("n", "0"); }), "n");
    EXPECT_EQ(field_of([&] { cfg.set("n", "12x"); }), "n");
    EXPECT_EQ(field_of([&] { cfg.set("gamma", "big"); }), "gamma");
    EXPECT_EQ(field_of([&] { cfg.set("seed", "-1"); }), "seed");
    EXPECT_EQ(field_of([&] { cfg.set("anchor", "maybe"); }), "anchor");
    EXPECT_EQ(field_of([&] { cfg.set("colour", "red"); }), "colour");
    EXPECT_EQ(field_of([&] { cfg.set("method", "newton"); }), "method");

    ExperimentConfig bad;
    bad.gamma = -1.0;
    EXPECT_EQ(field_of([&] { bad.validate(); }), "gamma");
    bad = ExperimentConfig{};
    bad.quad_order = 0;
    EXPECT_EQ(field_of([&] { bad.validate(); }), "quad_order");
    bad = ExperimentConfig{};
    bad.problem = "nope";
    EXPECT_EQ(field_of([&] { bad.validate(); }), "problem");
    bad = ExperimentConfig{};
    bad.method = Method::adbn;
    EXPECT_EQ(field_of([&] { bad.validate(); }), "method");
}

TEST(ConfigFile, ParsesCommentsAndBlankLines) {
    const auto dir = scratch_dir("config");
    const auto path = dir / "run.cfg";
    {
        std::ofstream f(path);
        f << "# a run\n\nproblem = dr_singular\nquad-order=6   # inline\n  n = 24\n";
    }
    const auto kv = read_config_file(path);
    ASSERT_EQ(kv.size(), 3u);
    EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"problem", "dr_singular"}));
    EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"quad_order", "6"}));
    EXPECT_EQ(kv[2], (std::pair<std::string, std::string>{"n", "24"}));

    {
        std::ofstream f(path);
        f << "problem dr_singular\n";
    }
    EXPECT_EQ(field_of([&] { read_config_file(path); }), "config");
    EXPECT_EQ(field_of([&] { read_config_file(dir / "missing.cfg"); }), "config");
}

TEST(Experiment, ReplayIsBitIdenticalApartFromTiming) {
    for (const char* problem : {"ls_sqrt", "dr_exp_bump"}) {
        ExperimentConfig cfg;
        cfg.problem = problem;
        cfg.n = 10;
        cfg.iters = 15;
        cfg.init_jitter = 0.2;
        cfg.seed = 7;
        const auto a = run_experiment(cfg);
        const auto b = run_experiment(cfg);
        ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
        for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
            const auto& ra = a.trace.records[k];
            const auto& rb = b.trace.records[k];
            EXPECT_EQ(ra.J, rb.J);
            EXPECT_EQ(ra.grad_norm, rb.grad_norm);
            EXPECT_EQ(ra.eta, rb.eta);
            EXPECT_EQ(ra.n, rb.n);
            if (!std::isnan(ra.e_n)) EXPECT_EQ(ra.e_n, rb.e_n);
        }
        EXPECT_EQ(a.b_final, b.b_final);

        cfg.seed = 8;
        const auto c = run_experiment(cfg);
        EXPECT_NE(c.trace.records.front().J, a.trace.records.front().J);
    }
}

TEST(Experiment, WritesTraceSummaryAndBreakpoints) {
    ExperimentConfig cfg;
    cfg.problem = "dr_exp_bump";
    cfg.n = 8;
    cfg.iters = 5;
    const auto res = run_experiment(cfg);
    const auto dir = scratch_dir("outputs");
    write_outputs(res, dir);

    const auto trace = read_lines(dir / "trace.csv");
    ASSERT_EQ(trace.size(), res.trace.records.size() + 1);
    EXPECT_EQ(trace[0], "iter,J,e_n,grad_norm,eta,n,wall_ms");
    EXPECT_EQ(trace[1].substr(0, 2), "0,");

    const auto summary = read_lines(dir / "summary.txt");
    ASSERT_EQ(summary.size(), 1u);
    EXPECT_EQ(summary[0], res.summary_line());
    EXPECT_NE(summary[0].find("problem=dr_exp_bump"), std::string::npos);
    EXPECT_NE(summary[0].find(" e_n="), std::string::npos);

    const auto b = read_lines(dir / "b_final.csv");
    ASSERT_EQ(b.size(), res.b_final.size());
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(std::stod(b[i]), res.b_final[i]);
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Experiment, AdaptiveRunWritesRefinements) {
    ExperimentConfig cfg;
    cfg.problem = "dr_exp_bump";
    cfg.method = Method::adbn;
    cfg.n = 8;
    cfg.iters = 30;
    cfg.max_iters_per_level = 10;
    cfg.eps_stop = 1e-6;
    const auto res = run_experiment(cfg);
    const auto dir = scratch_dir("adaptive");
    write_outputs(res, dir);
    const auto lines = read_lines(dir / "refinements.csv");
    ASSERT_GE(lines.size(), 3u);
    EXPECT_EQ(lines[0], "n,e_n,xi_n,r");
    EXPECT_GT(res.trace.records.back().n, 8u);
}

TEST(Diagnostics, RateReport) {
    IterTrace trace;
    EXPECT_TRUE(std::isnan(rate_report(trace)));
    IterRecord rec;
    rec.e_n = 8.83e-3;
    rec.n = 194;
    trace.records.push_back(rec);
    EXPECT_NEAR(rate_report(trace), 0.898, 5e-4);
    trace.records.back().e_n = std::nan("");
    EXPECT_TRUE(std::isnan(rate_report(trace)));
}

TEST(Diagnostics, ConditionNumbers) {
    EXPECT_EQ(parse_matrix_kind("mass"), MatrixKind::mass);
    EXPECT_THROW(parse_matrix_kind("hessian"), ConfigError);
    const double k8 = measure_condition(MatrixKind::mass, 8);
    const double k16 = measure_condition(MatrixKind::mass, 16);
    EXPECT_GT(k16 / k8, 8.0);
    EXPECT_LT(k16 / k8, 32.0);
}
