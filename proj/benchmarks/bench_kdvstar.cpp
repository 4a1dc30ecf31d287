#include <benchmark/benchmark.h>

#include "kdvstar/coupling.hpp"
#include "kdvstar/pde.hpp"
#include "kdvstar/phaseplane.hpp"
#include "kdvstar/soliton.hpp"

using namespace kdvstar;

namespace {

EdgeParams std_edge(double y0 = 0.0) { return {1.0, 0.0, -6.0, 1.0, y0, ""}; }

StarGraph line() {
    StarGraph g;
    g.edges_minus = {std_edge(-2.0)};
    g.edges_plus = {std_edge(-2.0)};
    return g;
}

void BM_ProfileResidual(benchmark::State& state) {
    auto prof = build_profile(std_edge());
    double y = -10.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kdv_residual(prof, y));
        y = y > 10.0 ? -10.0 : y + 1e-3;
    }
}
BENCHMARK(BM_ProfileResidual);

void BM_CheckMainTheorem(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    StarGraph g;
    g.edges_minus.assign(n, std_edge());
    g.edges_plus.assign(n, std_edge());
    Matrix U = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (auto _ : state) benchmark::DoNotOptimize(check_main_theorem(g, U, 1e-10).pass);
}
BENCHMARK(BM_CheckMainTheorem)->Arg(1)->Arg(4)->Arg(16);

void BM_HomoclinicShoot(benchmark::State& state) {
    PhaseParams p{1.0, 0.0, 1.0, 1.0, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(homoclinic_shoot(p).extremum_value);
}
BENCHMARK(BM_HomoclinicShoot);

void BM_SemidiscreteRhs(benchmark::State& state) {
    auto g = line();
    double h = 40.0 / static_cast<double>(state.range(0));
    StarGraphSolver s(g, {Matrix::Ones(2, 1), Matrix::Identity(1, 1)}, make_discretization(g, 40.0, h));
    std::vector<SolitonProfile> prof{build_profile(g.edges_minus[0]), build_profile(g.edges_plus[0])};
    auto f = sample_travelling_waves(prof, g, s.discretization(), 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(s.semidiscrete_rhs(f).u[0][0]);
    state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_SemidiscreteRhs)->Arg(400)->Arg(800)->Arg(1600);

void BM_SolverSetup(benchmark::State& state) {
    auto g = line();
    for (auto _ : state) {
        StarGraphSolver s(g, {Matrix::Ones(2, 1), Matrix::Identity(1, 1)}, make_discretization(g, 40.0, 0.05));
        benchmark::DoNotOptimize(s.probe_growth_rate());
    }
}
BENCHMARK(BM_SolverSetup);

}  // namespace
BENCHMARK_MAIN();
