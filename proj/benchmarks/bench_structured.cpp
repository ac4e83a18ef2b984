#include "dbn/assembly.hpp"
#include "dbn/block_newton.hpp"
#include "dbn/problems.hpp"
#include "dbn/structured_linalg.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

void BM_TridiagSolve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    dbn::TriDiagonal t(n);
    for (std::size_t i = 0; i < n; ++i) t.diag[i] = 4.0;
    for (std::size_t i = 0; i + 1 < n; ++i) t.sub[i] = t.sup[i] = -1.0;
    const auto rhs = random_vector(n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(dbn::tridiag_solve(t, rhs));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TridiagSolve)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oN);

void BM_MassInverseApply(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto p = dbn::Partition::make_uniform(n, 0.0, 1.0);
    const auto op = dbn::FactorizedOperator::mass(dbn::ScalarField::constant(1.0), p,
                                                  dbn::IntegrationPlan());
    const auto rhs = random_vector(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(op.apply_inverse(rhs));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MassInverseApply)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oN);

void BM_DbnIteration(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto entry = dbn::make_problem("dr_exp_bump");
    const auto plan = dbn::IntegrationPlan::with_features(dbn::QuadratureRule::gauss_legendre(5),
                                                          entry.dr.features, 0.0, 1.0);
    const dbn::DRObjective obj(entry.dr, plan);
    const auto net0 = dbn::ShallowReLUNet::uniform(0.0, n, 0.0, 1.0);
    dbn::SolverConfig cfg;
    for (auto _ : state) {
        state.PauseTiming();
        dbn::BlockNewtonSolver solver(obj, net0, cfg);
        state.ResumeTiming();
        benchmark::DoNotOptimize(solver.step());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DbnIteration)->RangeMultiplier(2)->Range(1024, 8192)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
