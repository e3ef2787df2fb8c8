// Microbenchmarks for the hot paths: ELBO evaluation, gradients, and whole
// fits at the 50x50 study design.

#include <benchmark/benchmark.h>

#include "gvacl/elbo.hpp"
#include "gvacl/optimizer.hpp"
#include "gvacl/simulator.hpp"

namespace {

using namespace gvacl;

Simulation study_draw(FamilyTag tag, int m, int n) {
    SimSpec spec;
    spec.family = tag == FamilyTag::Gamma ? Family::gamma(0.8)
                                          : Family::poisson();
    spec.m = m;
    spec.n = n;
    spec.beta = {-2.0, -2.0};
    spec.sigma_u = spec.sigma_v = 0.5;
    spec.covariate_law = CovariateLaw::normal(1.0, 1.0);
    spec.seed = 1234;
    return simulate(spec);
}

void bm_full_elbo(benchmark::State& state) {
    const Simulation sim = study_draw(FamilyTag::Poisson, 50, 50);
    auto [psi, xi] = initialize_full(sim.data, InitStrategy::Moments);
    for (auto _ : state)
        benchmark::DoNotOptimize(full_elbo(psi, xi, sim.data));
}
BENCHMARK(bm_full_elbo);

void bm_full_elbo_grad(benchmark::State& state) {
    const Simulation sim = study_draw(FamilyTag::Poisson, 50, 50);
    auto [psi, xi] = initialize_full(sim.data, InitStrategy::Moments);
    for (auto _ : state)
        benchmark::DoNotOptimize(full_elbo_grad(psi, xi, sim.data));
}
BENCHMARK(bm_full_elbo_grad);

void bm_composite_elbo_grad(benchmark::State& state) {
    const Simulation sim = study_draw(FamilyTag::Poisson, 50, 50);
    auto [rc, xi] = initialize_composite(sim.data, InitStrategy::Moments);
    for (auto _ : state)
        benchmark::DoNotOptimize(composite_elbo_grad(rc, xi, sim.data));
}
BENCHMARK(bm_composite_elbo_grad);

void bm_fit(benchmark::State& state) {
    const FamilyTag tag =
        state.range(0) == 0 ? FamilyTag::Poisson : FamilyTag::Gamma;
    const Simulation sim = study_draw(tag, 50, 50);
    FitConfig cfg;
    cfg.method = state.range(1) == 0 ? Method::FullGva : Method::Gvacl;
    for (auto _ : state) benchmark::DoNotOptimize(fit(sim.data, cfg));
}
BENCHMARK(bm_fit)
    ->ArgNames({"gamma", "gvacl"})
    ->Args({0, 0})
    ->Args({0, 1})
    ->Args({1, 0})
    ->Args({1, 1})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
