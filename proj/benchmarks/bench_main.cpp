#include "mfglab/carleman.hpp"
#include "mfglab/kernels.hpp"
#include "mfglab/mfg.hpp"
#include "mfglab/scenarios.hpp"

#include <benchmark/benchmark.h>

using namespace mfglab;

namespace {

GridPtr square_grid(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    return make_grid(Prism{1, 2, {}, 1}, {n}, 2 * n - 1);
}

void BM_ForwardSolve(benchmark::State& state) {
    const auto grid = square_grid(state);
    const Kernel kernel = Kernel::separable_delta(Profile::cosine_product());
    const auto made = manufacture_triple(grid, kernel, scenarios::default_coefficient(grid), scenarios::default_value(),
                                         scenarios::default_density(grid));
    const SpaceField k = scenarios::default_coefficient(grid);
    for (auto _ : state) benchmark::DoNotOptimize(solve_mfg_picard(made.spec, k, SolverOptions{}));
}
BENCHMARK(BM_ForwardSolve)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_KernelApply(benchmark::State& state) {
    const auto grid = square_grid(state);
    const auto made = manufacture_triple(grid, Kernel::none(), scenarios::default_coefficient(grid),
                                         scenarios::default_value(), scenarios::default_density(grid));
    const Field& m = made.triple.m;
    const Kernel causal = Kernel::heaviside_causal(Profile::cosine_product());
    for (auto _ : state) benchmark::DoNotOptimize(apply_kernel(causal, m, m.grid().nt() - 1));
}
BENCHMARK(BM_KernelApply)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_CarlemanFunctional(benchmark::State& state) {
    const auto grid = square_grid(state);
    const auto family = test_family(grid->prism(), 1);
    const Field u = family.front().sample(grid);
    const CarlemanParams params{8.0, 1000.0 / 7.0};
    for (auto _ : state) benchmark::DoNotOptimize(carleman_functional(u, OperatorSign::Plus, params, 1.0));
}
BENCHMARK(BM_CarlemanFunctional)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
