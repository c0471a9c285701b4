#include <spectrwm/baselines.hpp>
#include <spectrwm/estimators.hpp>
#include <spectrwm/jump_kernel.hpp>
#include <spectrwm/oracles.hpp>

#include <benchmark/benchmark.h>

#include <cmath>

using namespace spectrwm;

namespace {

std::shared_ptr<const Discretization> model(ModelKind kind, std::size_t n) {
    ModelSpec m;
    m.kind = kind;
    m.lambda = kind == ModelKind::Heat ? 1.0 : 0.0;
    return discretize(m, n);
}

// Events per second of the full event loop, per variant.
void BM_SimulateHeat(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto variant = static_cast<Variant>(state.range(1));
    const auto disc = model(ModelKind::Heat, n);
    const JumpKernel kernel(disc, {variant, 0.05});
    const auto start = kernel.make_state(std::vector<double>(n, 0.0));
    std::uint64_t events = 0;
    std::uint64_t r = 0;
    for (auto _ : state) {
        RngStream rng(1, r++);
        const auto end = kernel.simulate(start, 0.05, rng);
        events += end.step_count;
        benchmark::DoNotOptimize(end.v.data());
    }
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateHeat)
    ->ArgsProduct({{16, 64}, {static_cast<int>(Variant::Academic), static_cast<int>(Variant::Fast)}});

void BM_SimulateLangevinDetailedBalance(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto disc = model(ModelKind::Langevin, n);
    const auto target = std::make_shared<const LangevinTarget>(disc->grid, 1.0);
    const JumpKernel kernel(disc, {Variant::DetailedBalance, std::sqrt(disc->grid.dx())}, target);
    auto s = kernel.make_state(std::vector<double>(n, 0.0));
    RngStream rng(2, 0);
    for (auto _ : state) benchmark::DoNotOptimize(kernel.step(s, rng));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulateLangevinDetailedBalance)->Arg(20)->Arg(64);

void BM_AcademicRatesBurgers(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto disc = model(ModelKind::Burgers, n);
    const JumpKernel kernel(disc, {Variant::Academic, 0.1});
    const auto s = kernel.make_state(initial_condition(InitialCondition{InitialConditionKind::Sinusoid}, disc->grid));
    RateTable rates;
    for (auto _ : state) {
        kernel.compute_rates(s, rates);
        benchmark::DoNotOptimize(rates.total);
    }
}
BENCHMARK(BM_AcademicRatesBurgers)->Arg(16)->Arg(64)->Arg(128);

void BM_SpectralRoundTrip(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto basis = laplacian_eigenbasis(Grid(n));
    std::vector<double> v(n), c(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = std::sin(0.3 * static_cast<double>(j));
    for (auto _ : state) {
        basis.to_spectral(v, c);
        basis.from_spectral(c, v);
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_SpectralRoundTrip)->Arg(16)->Arg(64)->Arg(128);

void BM_PcnStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto target = std::make_shared<const LangevinTarget>(Grid(n), 1.0);
    const PcnSampler sampler(target);
    std::vector<double> v(n, 0.0);
    double phi = sampler.phi(v);
    RngStream rng(3, 0);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.step(v, phi, rng));
}
BENCHMARK(BM_PcnStep)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
