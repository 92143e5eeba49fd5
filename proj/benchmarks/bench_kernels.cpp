// Microbenchmarks for the hot kernels: directional rational applies on both
// backends and whole 2D steps.  Run with --benchmark_filter=... as usual.
#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "etdrd/problems.hpp"
#include "etdrd/stepper.hpp"
#include "etdrd/tensor_ops.hpp"

using namespace etdrd;

namespace {

Field filled_field(const Grid& g) {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Field f = Field::zeros(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
    return f;
}

void bm_axis_spectral(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const Axis axis = state.range(1) == 0 ? Axis::X : Axis::Y;
    const Grid g = unit_box_grid(2, m);
    const auto op = build_operator(g, axis, 1.0, 0.0);
    const auto factor = std::make_shared<const SpectralFactor>(spectral_factor(op));
    const auto payload = build_spectral_payload(factor, 0.01, scheme_p02());
    const Field f = filled_field(g);
    for (auto _ : state) benchmark::DoNotOptimize(apply_Q_spectral(payload, 1, 0.01, f, axis));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.size()));
}

void bm_axis_thomas(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const Axis axis = state.range(1) == 0 ? Axis::X : Axis::Y;
    const Grid g = unit_box_grid(2, m);
    const auto op = build_operator(g, axis, 1.0, 0.0);
    const auto payload = build_thomas_payload(op, 0.01, scheme_p02());
    const Field f = filled_field(g);
    for (auto _ : state) benchmark::DoNotOptimize(apply_Q_thomas(payload, 1, 0.01, f, axis));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.size()));
}

void bm_step_2d(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const BackendKind backend =
        state.range(1) == 0 ? BackendKind::Spectral : BackendKind::Thomas;
    const ProblemSpec spec = allen_cahn(2, ProblemParams{});
    const Grid g = unit_box_grid(2, m);
    const double tau = 1.0 / 32.0;
    const auto plan = make_plan(g, tau, spec.kappa, spec.q, scheme_p02(), backend);
    const StepperState st{0, 0.0, spec.initial_u(g)};
    for (auto _ : state) benchmark::DoNotOptimize(advance(plan, st, spec.source));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(st.U.size()));
}

} // namespace

BENCHMARK(bm_axis_spectral)->Args({64, 0})->Args({64, 1})->Args({256, 0})->Args({256, 1});
BENCHMARK(bm_axis_thomas)->Args({64, 0})->Args({64, 1})->Args({256, 0})->Args({256, 1});
BENCHMARK(bm_step_2d)->Args({64, 0})->Args({64, 1})->Args({256, 0})->Args({256, 1});

BENCHMARK_MAIN();
