#include <benchmark/benchmark.h>

#include "ihdg/study.hpp"

using namespace ihdg;

namespace {

DegreeConfig config_from(const benchmark::State& state)
{
    return {static_cast<Variant>(state.range(0)), static_cast<int>(state.range(1))};
}

} // namespace

// Per-element operator construction, including the postprocessing and nodal maps.
static void BM_AssembleElement(benchmark::State& state)
{
    const DegreeConfig cfg = config_from(state);
    const Mesh mesh = build_uniform_square(1);
    const ReferenceElements ref(cfg);
    for (auto _ : state) {
        const ElementProjector p(mesh, 0, ref);
        benchmark::DoNotOptimize(assemble_element(p, ref));
    }
}
BENCHMARK(BM_AssembleElement)->Args({0, 0})->Args({0, 1})->Args({1, 2})->Args({2, 3});

// Static condensation plus sparse LU of the Crank-Nicolson matrix.
static void BM_CondenseAndFactorize(benchmark::State& state)
{
    const HdgDiscretization disc(build_uniform_square(static_cast<int>(state.range(2))), config_from(state));
    for (auto _ : state)
        benchmark::DoNotOptimize(condense(disc, 2.0 / disc.mesh().h()));
    state.counters["trace_dofs"] = disc.num_trace_dofs();
}
BENCHMARK(BM_CondenseAndFactorize)
    ->Args({0, 0, 32})
    ->Args({0, 1, 32})
    ->Args({2, 2, 32})
    ->Unit(benchmark::kMillisecond);

// One Chaffee-Infante step with frozen-matrix iterations (factorization excluded).
static void BM_CrankNicolsonStep(benchmark::State& state)
{
    const HdgDiscretization disc(build_uniform_square(static_cast<int>(state.range(2))), config_from(state));
    const ManufacturedProblem p = ManufacturedProblem::chaffee_infante();
    const EvolutionProblem evo = p.evolution();
    CrankNicolsonStepper stepper(disc, p.nonlinearity, disc.mesh().h());
    FieldState s = disc.zero_state();
    int iterations = 0;
    for (auto _ : state) {
        if (s.t > 1.0)
            s = disc.zero_state();
        iterations += stepper.step(s, evo.source).iterations;
    }
    state.counters["picard_per_step"]
        = benchmark::Counter(static_cast<double>(iterations), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_CrankNicolsonStep)->Args({0, 0, 32})->Args({0, 1, 32})->Args({2, 2, 16})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
