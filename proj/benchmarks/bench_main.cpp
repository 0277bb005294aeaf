#include "robinp/assembly.hpp"
#include "robinp/eigenproblem.hpp"
#include "robinp/solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace robinp;

namespace {

MeshPtr mesh_for(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    return state.range(1) == 1 ? build_interval_mesh(0.0, 1.0, n) : build_rectangle_mesh(1.0, 1.0, n, n);
}

AuxiliaryProblem example_aux(const MeshPtr& m, double p) {
    ExampleReactionParams prm;
    if (p != 2.0) prm = {.eta = 4.0, .theta = 1.0, .q = 1.5, .tau = 1.001, .r = 4.0, .p = p};
    return {make_problem(m, p, 1.0), example_reaction(prm), 1.0, DiscreteField::constant(m, 1.0)};
}

DiscreteField bump(const MeshPtr& m) {
    return DiscreteField::interpolate(m, [](const Point& z) { return 1.0 + std::sin(3.0 * z[0]) * std::cos(2.0 * z[1]); });
}

void BM_Residual(benchmark::State& state) {
    const auto m = mesh_for(state);
    const auto aux = example_aux(m, 3.0);
    const auto u = bump(m);
    const auto y = element_gradients(u);
    for (auto _ : state) benchmark::DoNotOptimize(v_residual(aux, u, y));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m->num_nodes()));
}

void BM_Jacobian(benchmark::State& state) {
    const auto m = mesh_for(state);
    const auto aux = example_aux(m, 3.0);
    const auto u = bump(m);
    const auto y = element_gradients(u);
    for (auto _ : state) benchmark::DoNotOptimize(v_jacobian(aux, u, y));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m->num_nodes()));
}

void BM_Eigenpair(benchmark::State& state) {
    const auto m = mesh_for(state);
    const auto spec = make_problem(m, 2.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(spec));
}

void BM_SolveAuxiliary(benchmark::State& state) {
    const auto m = mesh_for(state);
    const auto aux = example_aux(m, 2.0);
    const auto init = DiscreteField::constant(m, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_auxiliary(aux, init));
}

}  // namespace

// Arguments: resolution, dimension.
BENCHMARK(BM_Residual)->Args({1024, 1})->Args({64, 2})->Args({256, 2});
BENCHMARK(BM_Jacobian)->Args({1024, 1})->Args({64, 2})->Args({256, 2});
BENCHMARK(BM_Eigenpair)->Args({256, 1})->Args({1024, 1})->Args({32, 2})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveAuxiliary)->Args({256, 1})->Args({32, 2})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
