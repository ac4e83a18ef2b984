#include "dbn/bfgs.hpp"
#include "dbn/block_newton.hpp"
#include "dbn/directions.hpp"
#include "dbn/errors.hpp"
#include "dbn/experiment.hpp"
#include "dbn/free_knot.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dbn;
using dbn::oracle::random_partition;
using dbn::oracle::random_vector;
using dbn::oracle::rel_diff;

namespace {

/// Target network with well-separated knots and the fitted net on a nearby partition.
struct NearOptimum {
    LSObjective obj;
    ShallowReLUNet start;
};

NearOptimum near_optimum(double offset) {
    const Partition target_p(0.0, 1.0, {0.2, 0.45, 0.7}, 1e-8);
    const ShallowReLUNet target(0.1, {1.0, -2.0, 1.5}, target_p);
    LSProblem prob;
    prob.f = ScalarField([target](double x) { return target(x); });
    prob.features = {{0.2, 0.01}, {0.45, 0.01}, {0.7, 0.01}};
    const IntegrationPlan plan(QuadratureRule::gauss_legendre(8), {}, 4);
    LSObjective obj(prob, plan);
    const Partition p(0.0, 1.0, {0.2 + offset, 0.45 - offset, 0.7 + offset}, 1e-8);
    ShallowReLUNet start(prob.f(0.0), obj.solve_linear(p), p);
    return {std::move(obj), std::move(start)};
}

void expect_monotone(const IterTrace& trace, const std::string& label) {
    ASSERT_GE(trace.records.size(), 2u) << label;
    for (std::size_t k = 1; k < trace.records.size(); ++k)
        EXPECT_LE(trace.records[k].J, trace.records[k - 1].J) << label << " iter " << k;
}

}  // namespace

TEST(SolverConfig, Validation) {
    SolverConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.damping.shrink = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = SolverConfig{};
    cfg.damping.max_backtracks = 0;
    try {
        cfg.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "damping.max_backtracks");
    }
    EXPECT_EQ(parse_method("dbgn"), Method::dbgn);
    EXPECT_EQ(to_string(Method::adbn), "adbn");
    EXPECT_THROW(parse_method("newton"), ConfigError);
}

TEST(DampedUpdate, ZeroDirectionKeepsNetwork) {
    auto s = near_optimum(0.01);
    const auto g = s.obj.grad_b(s.start);
    const std::vector<double> zero(g.size(), 0.0);
    const auto step = damped_update(s.obj, s.start, g, zero, DampingConfig{}, 1e-8);
    EXPECT_EQ(step.eta, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_EQ(step.net.partition()[i], s.start.partition()[i]);
}

TEST(DampedUpdate, UphillDirectionRejected) {
    auto s = near_optimum(0.01);
    const auto g = s.obj.grad_b(s.start);
    std::vector<double> uphill(g.begin(), g.end());
    for (auto& v : uphill) v = -v;
    const auto step = damped_update(s.obj, s.start, g, uphill, DampingConfig{}, 1e-8);
    EXPECT_EQ(step.eta, 0.0);
    EXPECT_EQ(step.loss, s.obj.loss(s.start));
}

TEST(DampedUpdate, FullStepNearOptimum) {
    for (bool resolve : {false, true}) {
        auto s = near_optimum(2e-3);
        const auto g = s.obj.grad_b(s.start);
        const auto p = newton_direction(s.obj.hessian(s.start), g);
        DampingConfig cfg;
        cfg.resolve_weights = resolve;
        const auto step = damped_update(s.obj, s.start, g, p, cfg, 1e-8);
        EXPECT_EQ(step.eta, 1.0) << resolve;
        EXPECT_LT(step.loss, s.obj.loss(s.start));
    }
}

TEST(BlockNewton, FullStepsOnRepresentableTarget) {
    // The b-step keeps c fixed, so the outer iteration converges linearly even here;
    // near the optimum every step is accepted undamped.
    auto s = near_optimum(0.02);
    SolverConfig cfg;
    cfg.max_iters = 12;
    const auto trace = run_dbn(s.obj, s.start, cfg);
    expect_monotone(trace, "dbn");
    for (std::size_t k = 1; k < trace.records.size(); ++k) EXPECT_EQ(trace.records[k].eta, 1.0);
    EXPECT_LT(trace.records.back().J, 0.7 * trace.records.front().J);
    EXPECT_LT(std::abs(trace.final_net->partition()[0] - 0.2), 0.02);
}

TEST(BlockNewton, GradTolStopsEarly) {
    auto s = near_optimum(0.02);
    SolverConfig cfg;
    cfg.max_iters = 100;
    cfg.grad_tol = 1.7e-3;
    const auto trace = run_dbgn(s.obj, s.start, cfg);
    EXPECT_LT(trace.records.size(), 100u);
    EXPECT_LE(trace.records.back().grad_norm, 1.7e-3);
}

TEST(BlockNewton, MonotoneOnEveryRegisteredProblem) {
    for (const auto& id : problem_ids()) {
        for (Method m : {Method::dbn, Method::dbgn}) {
            ExperimentConfig cfg;
            cfg.problem = id;
            cfg.n = 16;
            cfg.iters = 40;
            cfg.method = m;
            const auto result = run_experiment(cfg);
            expect_monotone(result.trace, id + "/" + to_string(m));
        }
    }
}

TEST(BlockNewton, MonotoneWithoutAnchorAndWithFrozenWeights) {
    ExperimentConfig cfg;
    cfg.problem = "ls_sqrt";
    cfg.n = 12;
    cfg.iters = 40;
    cfg.anchor = false;
    expect_monotone(run_experiment(cfg).trace, "unanchored");

    const auto entry = make_problem("ls_sqrt");
    const auto plan = IntegrationPlan::with_features(QuadratureRule::gauss_legendre(5),
                                                     entry.ls.features, 0.0, 1.0);
    const LSObjective obj(entry.ls, plan);
    SolverConfig sc;
    sc.max_iters = 40;
    sc.damping.resolve_weights = false;
    sc.gn_retry = false;
    const auto p = Partition::make_anchored_uniform(12, 0.0, 1.0);
    expect_monotone(run_dbn(obj, ShallowReLUNet(0.0, obj.solve_linear(p), p), sc), "frozen");
}

TEST(BlockNewton, AnchorStaysPinned) {
    const auto entry = make_problem("ls_sqrt");
    const auto plan = IntegrationPlan::with_features(QuadratureRule::gauss_legendre(5),
                                                     entry.ls.features, 0.0, 1.0);
    const LSObjective obj(entry.ls, plan);
    const auto p = Partition::make_anchored_uniform(10, 0.0, 1.0);
    SolverConfig cfg;
    cfg.max_iters = 30;
    const auto trace = run_dbn(obj, ShallowReLUNet(0.0, obj.solve_linear(p), p), cfg);
    EXPECT_TRUE(trace.final_net->partition().anchored());
    EXPECT_EQ(trace.final_net->partition()[0], 0.0);
}

TEST(Bfgs, ConvexQuadraticInTwoVariables) {
    const ValueAndGradient fg = [](std::span<const double> x, std::span<double> g) {
        const double a = x[0] - 1.0;
        const double b = x[1] + 2.0;
        g[0] = 2.0 * (3.0 * a + b);
        g[1] = 2.0 * (a + 2.0 * b);
        return 3.0 * a * a + 2.0 * a * b + 2.0 * b * b;
    };
    BfgsConfig cfg;
    cfg.gtol = 1e-10;
    const auto res = minimize_bfgs(fg, {0.0, 0.0}, cfg);
    EXPECT_NEAR(res.x[0], 1.0, 1e-8);
    EXPECT_NEAR(res.x[1], -2.0, 1e-8);
    EXPECT_LE(res.trace.records.size(), 6u);
}

TEST(Bfgs, JointGradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(301);
    const IntegrationPlan plan;
    LSProblem ls;
    ls.f = ScalarField([](double x) { return std::sin(3.0 * x); });
    DRProblem dr;
    dr.a = ScalarField([](double x) { return 1.0 + x; }, [](double) { return 1.0; });
    dr.f = ScalarField([](double x) { return x * x; });
    dr.gamma = 50.0;
    const LSFreeKnot fk_ls(ls, plan);
    const DRFreeKnot fk_dr(dr, plan);
    for (const FreeKnotObjective* obj : {static_cast<const FreeKnotObjective*>(&fk_ls),
                                         static_cast<const FreeKnotObjective*>(&fk_dr)}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto p = random_partition(rng, 6);
            const ShallowReLUNet net(obj->c0(), random_vector(rng, 6, 0.3, 1.0), p);
            auto x = pack_parameters(net);
            std::vector<double> g(x.size());
            obj->value_and_gradient(x, g);
            std::vector<double> fd(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                auto xp = x;
                auto xm = x;
                xp[i] += 1e-6;
                xm[i] -= 1e-6;
                fd[i] = (obj->value(xp) - obj->value(xm)) / 2e-6;
            }
            EXPECT_LT(rel_diff(g, fd), 1e-6);
        }
    }
}

TEST(Bfgs, BaselineDecreasesLoss) {
    const auto entry = make_problem("ls_sqrt");
    const auto plan = IntegrationPlan::with_features(QuadratureRule::gauss_legendre(5),
                                                     entry.ls.features, 0.0, 1.0);
    const LSFreeKnot obj(entry.ls, plan);
    const LSObjective block(entry.ls, plan);
    const auto p = Partition::make_anchored_uniform(8, 0.0, 1.0);
    const ShallowReLUNet net(0.0, block.solve_linear(p), p);
    BfgsConfig cfg;
    cfg.max_iters = 50;
    const auto res = run_bfgs_baseline(obj, net, cfg);
    EXPECT_LT(res.trace.records.back().J, res.trace.records.front().J);
    EXPECT_EQ(res.x[8], 0.0);
}
