#include "dbn/assembly.hpp"
#include "dbn/block_newton.hpp"
#include "dbn/dense.hpp"
#include "dbn/errors.hpp"
#include "dbn/models.hpp"
#include "dbn/problems.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace dbn;
using dbn::oracle::random_partition;
using dbn::oracle::random_vector;
using dbn::oracle::rel_diff;
using dbn::oracle::to_eigen;
using dbn::oracle::to_std;

namespace {

/// Random weights bounded away from zero.
std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n) {
    auto c = random_vector(rng, n, 0.3, 1.5);
    std::bernoulli_distribution flip(0.3);
    for (auto& x : c)
        if (flip(rng)) x = -x;
    return c;
}

LSProblem smooth_ls() {
    LSProblem prob;
    prob.f = ScalarField([](double x) { return std::sin(4.0 * x) + x * x; });
    prob.r = ScalarField([](double x) { return 1.0 + x; });
    return prob;
}

DRProblem smooth_dr(double gamma = 10.0) {
    DRProblem prob;
    prob.a = ScalarField([](double x) { return 1.0 + x * x; }, [](double x) { return 2.0 * x; });
    prob.r = ScalarField([](double x) { return 1.0 + x; });
    prob.f = ScalarField([](double x) { return std::cos(3.0 * x) + x; });
    prob.alpha_bc = 0.3;
    prob.beta_bc = -0.2;
    prob.gamma = gamma;
    return prob;
}

ShallowReLUNet shifted(const ShallowReLUNet& net, std::size_t j, double delta) {
    std::vector<double> b(net.partition().breakpoints().begin(),
                          net.partition().breakpoints().end());
    b[j] += delta;
    return net.with_partition(Partition(0.0, 1.0, b, 1e-12));
}

template <class Loss>
std::vector<double> fd_gradient(const ShallowReLUNet& net, const Loss& loss, double step) {
    std::vector<double> g(net.size());
    for (std::size_t j = 0; j < net.size(); ++j)
        g[j] = (loss(shifted(net, j, step)) - loss(shifted(net, j, -step))) / (2.0 * step);
    return g;
}

template <class Grad>
Eigen::MatrixXd fd_hessian(const ShallowReLUNet& net, const Grad& grad, double step) {
    const std::size_t n = net.size();
    Eigen::MatrixXd h(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto gp = grad(shifted(net, j, step));
        const auto gm = grad(shifted(net, j, -step));
        for (std::size_t i = 0; i < n; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * step);
    }
    return h;
}

double rel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).norm() / b.norm();
}

constexpr std::size_t kSizes[] = {2, 4, 8, 16};

}  // namespace

TEST(LeastSquares, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(101);
    const IntegrationPlan plan;
    const LSProblem prob = smooth_ls();
    int instances = 0;
    for (std::size_t n : kSizes) {
        for (int trial = 0; trial < 13; ++trial, ++instances) {
            const ShallowReLUNet net(prob.f(0.0), random_weights(rng, n), random_partition(rng, n));
            const auto loss = [&](const ShallowReLUNet& v) { return ls_loss(v, prob, plan); };
            EXPECT_LT(rel_diff(ls_grad_b(net, prob, plan), fd_gradient(net, loss, 1e-6)), 1e-5)
                << "n = " << n;
        }
    }
    EXPECT_GE(instances, 50);
}

TEST(LeastSquares, HessianMatchesFiniteDifferences) {
    std::mt19937_64 rng(102);
    const IntegrationPlan plan;
    const LSProblem prob = smooth_ls();
    int instances = 0;
    for (std::size_t n : kSizes) {
        for (int trial = 0; trial < 13; ++trial, ++instances) {
            const ShallowReLUNet net(prob.f(0.0), random_weights(rng, n), random_partition(rng, n));
            const auto grad = [&](const ShallowReLUNet& v) { return ls_grad_b(v, prob, plan); };
            EXPECT_LT(rel_matrix(to_dense(ls_hessian(net, prob, plan)), fd_hessian(net, grad, 1e-6)),
                      2e-4)
                << "n = " << n;
        }
    }
    EXPECT_GE(instances, 50);
}

TEST(LeastSquares, SolveLinearMinimizes) {
    std::mt19937_64 rng(103);
    const IntegrationPlan plan;
    const LSProblem prob = smooth_ls();
    const auto p = random_partition(rng, 12);
    const ShallowReLUNet net(prob.f(0.0), ls_solve_linear(prob, p, plan), p);
    const double j0 = ls_loss(net, prob, plan);
    for (int k = 0; k < 10; ++k) {
        auto c = std::vector<double>(net.c().begin(), net.c().end());
        const auto d = random_vector(rng, c.size(), -1e-3, 1e-3);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += d[i];
        EXPECT_GT(ls_loss(net.with_weights(c), prob, plan), j0);
    }
}

TEST(LeastSquares, SolveLinearMatchesDense) {
    std::mt19937_64 rng(104);
    const IntegrationPlan plan;
    const LSProblem prob = smooth_ls();
    for (std::size_t n : {3u, 16u, 32u}) {
        const auto p = random_partition(rng, n);
        const Eigen::VectorXd ref = dense_mass(prob.r, p, plan)
                                        .ldlt()
                                        .solve(to_eigen(rhs_ls(prob.f, prob.r, p, plan)));
        EXPECT_LT(rel_diff(ls_solve_linear(prob, p, plan), to_std(ref)), 1e-9);
    }
}

TEST(LeastSquares, RepresentableTargetIsExact) {
    std::mt19937_64 rng(105);
    const IntegrationPlan plan;
    const auto p = random_partition(rng, 10);
    const ShallowReLUNet target(0.4, random_weights(rng, 10), p);
    LSProblem prob;
    prob.f = ScalarField([target](double x) { return target(x); });
    const ShallowReLUNet fit(prob.f(0.0), ls_solve_linear(prob, p, plan), p);
    EXPECT_LT(ls_loss(fit, prob, plan), 1e-12);
}

TEST(LeastSquares, HessianParts) {
    std::mt19937_64 rng(106);
    const IntegrationPlan plan;
    const auto p = random_partition(rng, 6);
    const ShallowReLUNet target(0.0, random_weights(rng, 6), p);
    LSProblem prob;
    prob.f = ScalarField([target](double x) { return target(x); });

    // u_n = f at the breakpoints: the diagonal part vanishes and H is PSD.
    const auto h = ls_hessian(target, prob, plan);
    for (double s : h.diag_part) EXPECT_NEAR(s, 0.0, 1e-14);
    const Eigen::MatrixXd dense = to_dense(h);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues().minCoeff(),
              -1e-14);

    // u_n > f everywhere: all diagonal weights positive.
    LSProblem below;
    below.f = ScalarField([target](double x) { return target(x) - 1.0; });
    const ShallowReLUNet above(target.c0(), std::vector<double>(target.c().begin(), target.c().end()),
                               p);
    const auto ha = ls_hessian(above, below, plan);
    for (double w : ha.diag_part) EXPECT_GT(w, 0.0);
}

TEST(LeastSquares, GaussNewtonIsHessianWithoutDiagonal) {
    std::mt19937_64 rng(107);
    const IntegrationPlan plan;
    const LSProblem prob = smooth_ls();
    for (std::size_t n : {4u, 16u, 32u}) {
        const ShallowReLUNet net(prob.f(0.0), random_weights(rng, n), random_partition(rng, n));
        const auto h = ls_hessian(net, prob, plan);
        auto gn = gauss_newton_matrix(net, prob, plan);
        for (double s : gn.diag_part) EXPECT_EQ(s, 0.0);
        auto stripped = h;
        std::fill(stripped.diag_part.begin(), stripped.diag_part.end(), 0.0);
        EXPECT_LT((to_dense(gn) - to_dense(stripped)).cwiseAbs().maxCoeff(), 1e-15);
        const Eigen::MatrixXd dense = to_dense(gn);
        for (int k = 0; k < 10; ++k) {
            const auto x = to_eigen(random_vector(rng, n));
            EXPECT_GT(x.dot(dense * x), 0.0);
        }
    }
}

TEST(DiffusionReaction, EnergyExamples) {
    const IntegrationPlan plan;
    DRProblem prob;
    const ShallowReLUNet zero(0.0, std::vector<double>(5, 0.0), Partition::make_uniform(5, 0, 1));
    EXPECT_EQ(dr_energy(zero, prob, plan), 0.0);
    prob.beta_bc = 1.0;
    prob.gamma = 1e4;
    EXPECT_NEAR(dr_energy(zero, prob, plan), 5000.0, 1e-9);
}

TEST(DiffusionReaction, EnergyMatchesReferenceQuadrature) {
    std::mt19937_64 rng(108);
    const IntegrationPlan plan;
    const IntegrationPlan fine(QuadratureRule::gauss_legendre(12), {}, 4);
    DRProblem prob;
    prob.f = ScalarField([](double x) { return x; });
    prob.beta_bc = 0.7;
    prob.gamma = 50.0;
    const ShallowReLUNet net(0.0, random_weights(rng, 9), random_partition(rng, 9));
    const double ref =
        integrate_piecewise(net, fine,
                            [&](std::size_t k, double x) {
                                const double u = net.value_on(k, x);
                                const double du = net.slopes()[k];
                                return 0.5 * du * du + 0.5 * u * u - x * u;
                            }) +
        0.5 * prob.gamma * std::pow(net(1.0) - prob.beta_bc, 2);
    EXPECT_NEAR(dr_energy(net, prob, plan), ref, 1e-10 * std::abs(ref));
}

TEST(DiffusionReaction, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(109);
    const IntegrationPlan plan;
    const DRProblem prob = smooth_dr();
    int instances = 0;
    for (std::size_t n : kSizes) {
        for (int trial = 0; trial < 13; ++trial, ++instances) {
            const ShallowReLUNet net(prob.alpha_bc, random_weights(rng, n),
                                     random_partition(rng, n));
            const auto loss = [&](const ShallowReLUNet& v) { return dr_energy(v, prob, plan); };
            EXPECT_LT(rel_diff(dr_grad_b(net, prob, plan), fd_gradient(net, loss, 1e-6)), 1e-5)
                << "n = " << n;
        }
    }
    EXPECT_GE(instances, 50);
}

TEST(DiffusionReaction, HessianMatchesFiniteDifferences) {
    std::mt19937_64 rng(110);
    const IntegrationPlan plan;
    const DRProblem prob = smooth_dr();
    int instances = 0;
    for (std::size_t n : kSizes) {
        for (int trial = 0; trial < 13; ++trial, ++instances) {
            const ShallowReLUNet net(prob.alpha_bc, random_weights(rng, n),
                                     random_partition(rng, n));
            const auto grad = [&](const ShallowReLUNet& v) { return dr_grad_b(v, prob, plan); };
            EXPECT_LT(rel_matrix(to_dense(dr_hessian(net, prob, plan)), fd_hessian(net, grad, 1e-6)),
                      2e-4)
                << "n = " << n;
        }
    }
    EXPECT_GE(instances, 50);
}

TEST(DiffusionReaction, HessianWithoutAnalyticDerivativeWarns) {
    std::mt19937_64 rng(111);
    const IntegrationPlan plan;
    DRProblem prob = smooth_dr();
    prob.a = ScalarField([](double x) { return 1.0 + x * x; });
    const ShallowReLUNet net(prob.alpha_bc, random_weights(rng, 4), random_partition(rng, 4));
    bool used_fd = false;
    const auto h = dr_hessian(net, prob, plan, &used_fd);
    EXPECT_TRUE(used_fd);
    const auto grad = [&](const ShallowReLUNet& v) { return dr_grad_b(v, prob, plan); };
    EXPECT_LT(rel_matrix(to_dense(h), fd_hessian(net, grad, 1e-6)), 2e-4);
}

TEST(DiffusionReaction, ZeroWeightsZeroGradient) {
    const IntegrationPlan plan;
    const DRProblem prob = smooth_dr();
    const ShallowReLUNet net(prob.alpha_bc, std::vector<double>(6, 0.0),
                             Partition::make_uniform(6, 0, 1));
    for (double g : dr_grad_b(net, prob, plan)) EXPECT_EQ(g, 0.0);
}

TEST(DiffusionReaction, SolveLinearMatchesDense) {
    std::mt19937_64 rng(112);
    const IntegrationPlan plan;
    for (double gamma : {10.0, 1e4}) {
        const DRProblem prob = smooth_dr(gamma);
        for (std::size_t n : {2u, 8u, 32u}) {
            const auto p = random_partition(rng, n);
            const Eigen::VectorXd d = to_eigen(boundary_gradient_vector(p));
            const Eigen::MatrixXd a = dense_stiffness(prob.a, p, plan) +
                                      dense_mass(prob.r, p, plan) + gamma * d * d.transpose();
            const Eigen::VectorXd rhs = to_eigen(rhs_dr(prob.f, prob.r, prob.alpha_bc, p, plan)) +
                                        gamma * (prob.beta_bc - prob.alpha_bc) * d;
            // Extended precision keeps the oracle's own round-off out of the comparison.
            using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
            using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
            const VecL ref_l =
                MatL(a.cast<long double>()).partialPivLu().solve(VecL(rhs.cast<long double>()));
            const Eigen::VectorXd ref = ref_l.cast<double>();
            const double err = rel_diff(dr_solve_linear(prob, p, plan), to_std(ref));
            const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
            const double kappa =
                svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
            // A large penalty makes the system ill-conditioned; no double solver beats kappa * eps.
            EXPECT_LT(err, std::max(1e-10, kappa * 2.2e-16)) << "gamma " << gamma << " n " << n;
            if (gamma <= 10.0) EXPECT_LT(err, 1e-10);
        }
    }
}

TEST(DiffusionReaction, ConstantSolutionGivesZeroWeights) {
    const IntegrationPlan plan;
    DRProblem prob = smooth_dr();
    prob.alpha_bc = prob.beta_bc = 0.8;
    prob.f = ScalarField([r = prob.r](double x) { return 0.8 * r(x); });
    for (double c : dr_solve_linear(prob, Partition::make_uniform(7, 0, 1), plan))
        EXPECT_NEAR(c, 0.0, 1e-12);
}

TEST(DiffusionReaction, HessianReducesForConstantDiffusion) {
    std::mt19937_64 rng(113);
    const IntegrationPlan plan;
    DRProblem prob = smooth_dr(0.0);
    prob.a = ScalarField::constant(2.0);
    const ShallowReLUNet net(prob.alpha_bc, random_weights(rng, 7), random_partition(rng, 7));
    const auto h = dr_hessian(net, prob, plan);
    const auto u = net.breakpoint_values();
    for (std::size_t j = 0; j < 7; ++j) {
        const double bj = net.partition()[j];
        EXPECT_NEAR(h.diag_part[j], prob.r(bj) * u[j] - prob.f(bj), 1e-13);
    }

    // With gamma = 0 and a' = 0 the Gauss-Newton matrix has the least-squares form.
    const auto gn = gauss_newton_matrix(net, prob, plan);
    LSProblem ls;
    ls.f = prob.f;
    ls.r = prob.r;
    EXPECT_LT((to_dense(gn) - to_dense(gauss_newton_matrix(net, ls, plan))).cwiseAbs().maxCoeff(),
              1e-14);
}

TEST(ErrorNorms, ExactNetworkHasZeroError) {
    std::mt19937_64 rng(114);
    const IntegrationPlan plan;
    const ShallowReLUNet net(0.2, random_weights(rng, 8), random_partition(rng, 8));
    const ScalarField u([net](double x) { return net(x); });
    const ScalarField du([net](double x) { return net.derivative(x); });
    EXPECT_LT(l2_rel_error(net, u, plan), 1e-12);
    EXPECT_LT(h1_rel_error(net, du, plan), 1e-12);
    EXPECT_THROW(h1_rel_error(net, ScalarField::constant(0.0), plan), std::domain_error);
}

TEST(UnitMap, IdentityIntervalUnchanged) {
    const DRProblem prob = smooth_dr();
    const auto up = to_unit_problem(prob);
    EXPECT_EQ(up.map.x_lo, 0.0);
    EXPECT_EQ(up.map.length, 1.0);
    for (double x : {0.1, 0.5, 0.9}) {
        EXPECT_EQ(up.problem.a(x), prob.a(x));
        EXPECT_EQ(up.problem.f(x), prob.f(x));
    }
}

TEST(UnitMap, DiffusionScalesWithSquaredLength) {
    DRProblem prob;
    prob.a = ScalarField::constant(1e-4);
    prob.x_lo = -1.0;
    prob.x_hi = 1.0;
    const auto up = to_unit_problem(prob);
    EXPECT_NEAR(up.problem.a(0.3), 0.25e-4, 1e-20);
    EXPECT_EQ(up.problem.x_lo, 0.0);
    EXPECT_EQ(up.problem.x_hi, 1.0);
    EXPECT_EQ(up.map.to_physical(0.25), -0.5);
}

TEST(UnitMap, SingularProblemSelfConsistent) {
    const double nu = 1e-2;
    const double eps = std::sqrt(nu);
    const auto phys = make_problem("dr_singular", nu);
    const auto mapped = map_to_unit(phys);

    DRProblem hand;
    hand.a = ScalarField::constant(nu / 4.0);
    hand.r = ScalarField::constant(1.0);
    hand.f = ScalarField([f = phys.dr.f](double t) { return f(-1.0 + 2.0 * t); });
    hand.gamma = phys.dr.gamma;
    const ScalarField du_hand([du = *phys.du_exact](double t) { return 2.0 * du(-1.0 + 2.0 * t); });

    const std::vector<Feature> feats{{0.25, eps / 2}, {0.75, eps / 2}};
    const auto plan = IntegrationPlan::with_features(QuadratureRule::gauss_legendre(5), feats, 0, 1);
    const DRObjective native(mapped.dr, plan, mapped.du_exact);
    const DRObjective manual(hand, plan, du_hand);
    const auto p = Partition::make_uniform(31, 0.0, 1.0);
    const ShallowReLUNet a(0.0, native.solve_linear(p), p);
    const ShallowReLUNet b(0.0, manual.solve_linear(p), p);
    EXPECT_NEAR(*native.rel_error(a), *manual.rel_error(b), 1e-12);
}

TEST(Registry, SelfTestResiduals) {
    for (const auto& id : problem_ids()) {
        const auto e = make_problem(id);
        EXPECT_LE(registry_self_test(e), 1e-8 * std::max(1.0, std::abs(e.dr.f(0.3)))) << id;
        EXPECT_LE(registry_self_test(map_to_unit(e)), 1e-6) << id;
    }
    EXPECT_THROW(make_problem("nope"), ConfigError);
    EXPECT_THROW(make_problem("dr_singular", -1.0), ConfigError);
    EXPECT_EQ(make_problem("dr_singular:1e-6").nu, 1e-6);
}
