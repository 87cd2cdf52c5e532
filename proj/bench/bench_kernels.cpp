// OpenMP kernels against their serial references, plus one full propagator
// step and a tracer sweep on the production grid size.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "bohmion/bohm.hpp"
#include "bohmion/kernels.hpp"
#include "bohmion/propagator.hpp"
#include "bohmion/spectral.hpp"

using namespace bohmion;

namespace {

constexpr std::size_t kN = 400;

std::vector<Complex> random_field(std::size_t count) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    std::vector<Complex> v(count);
    for (auto& z : v) z = {d(rng), d(rng)};
    return v;
}

template <bool Parallel>
void BM_PotentialKick(benchmark::State& state) {
    auto data = random_field(kN * kN);
    const auto table = random_field(kN * kN);
    const auto axis = random_field(kN);
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::potential_kick(data, table, axis, kN);
        } else {
            kernels::serial::potential_kick(data, table, axis, kN);
        }
        benchmark::DoNotOptimize(data.data());
    }
}

template <bool Parallel>
void BM_WeightedNorm(benchmark::State& state) {
    const auto data = random_field(kN * kN);
    const std::vector<double> w(kN, 0.5);
    for (auto _ : state) {
        double r = Parallel ? kernels::weighted_norm(data, w, kN) : kernels::serial::weighted_norm(data, w, kN);
        benchmark::DoNotOptimize(r);
    }
}

template <bool Parallel>
void BM_Density(benchmark::State& state) {
    const auto data = random_field(kN * kN);
    std::vector<double> out(kN * kN);
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::density(data, out);
        } else {
            kernels::serial::density(data, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_Tracers(benchmark::State& state) {
    const Grid2D g = make_grid_with_spacing(60.0, 0.3);
    const MolecularModel m{5.6};
    const LaserPulse pulse = LaserPulse::from_lab(1064.0, 1.7e14);
    const Spectral spectral(g);
    WaveField psi = WaveField::sample(g, [](double x1, double x2) {
        return std::exp(-0.1 * (x1 * x1 + x2 * x2)) * std::exp(Complex(0, 0.3 * (x1 - x2)));
    });
    const VelocityFrame now(psi, spectral);
    psi.set_time(0.02);
    const VelocityFrame next(psi, spectral);
    std::vector<Point> seeds;
    for (double a = -6; a < 6; a += 0.3)
        for (double b = -6; b < 6; b += 0.3) seeds.push_back({a, b});
    for (auto _ : state) {
        auto states = seed_states(seeds, 0.0);
        if constexpr (Parallel) {
            advance_trajectories(states, now, next, m, pulse, TrajectoryMode::full(), TracerOptions{});
        } else {
            serial::advance_trajectories(states, now, next, m, pulse, TrajectoryMode::full(), TracerOptions{});
        }
        benchmark::DoNotOptimize(states.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seeds.size()));
}

void BM_PropagatorStep(benchmark::State& state) {
    const Grid2D g = make_grid_with_spacing(60.0, 0.3);
    const SplitStepPropagator prop(g, MolecularModel{5.6}, LaserPulse::from_lab(1064.0, 1.7e14), PropagatorOptions{});
    WaveField psi = WaveField::sample(g, [](double x1, double x2) { return std::exp(-0.1 * (x1 * x1 + x2 * x2)); });
    for (auto _ : state) {
        prop.advance(psi);
    }
}

} // namespace

BENCHMARK(BM_PotentialKick<false>)->Name("potential_kick/serial");
BENCHMARK(BM_PotentialKick<true>)->Name("potential_kick/openmp");
BENCHMARK(BM_WeightedNorm<false>)->Name("weighted_norm/serial");
BENCHMARK(BM_WeightedNorm<true>)->Name("weighted_norm/openmp");
BENCHMARK(BM_Density<false>)->Name("density/serial");
BENCHMARK(BM_Density<true>)->Name("density/openmp");
BENCHMARK(BM_Tracers<false>)->Name("tracers/serial");
BENCHMARK(BM_Tracers<true>)->Name("tracers/openmp");
BENCHMARK(BM_PropagatorStep)->Name("propagator_step")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
