// Serial reference vs OpenMP kernels: FDTD step, covariance assembly, grid prediction.
// Run with OMP_NUM_THREADS set to compare; on one core both variants should tie.

#include "waveinform/covariance.hpp"
#include "waveinform/experiments.hpp"
#include "waveinform/gp.hpp"
#include "waveinform/wave_sim.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace waveinform;

namespace {

FdtdState make_state(int n) {
    FdtdState s;
    s.n = n;
    s.dx = 1.0 / (n - 1);
    s.c = 0.5;
    s.dt = 0.5 * s.dx / s.c;
    const std::size_t total = static_cast<std::size_t>(n) * n * n;
    s.prev.assign(total, 0.0);
    s.cur.assign(total, 0.0);
    s.next.assign(total, 0.0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec3 x = s.dx * Vec3(i, j, k) - Vec3(0.5, 0.5, 0.5);
                s.cur[s.idx(i, j, k)] = s.prev[s.idx(i, j, k)] = std::exp(-x.squaredNorm() / 0.01);
            }
    return s;
}

std::vector<SpaceTimePoint> sensor_points(int sensors) {
    ExperimentConfig cfg = preset(3);
    cfg.sensors.count = sensors;
    std::vector<SpaceTimePoint> Z;
    for (const auto& x : sensor_positions(cfg.sensors))
        for (int k = 0; k < 75; ++k) Z.push_back({x, 0.02 * k});
    return Z;
}

template <bool Parallel>
void BM_FdtdStep(benchmark::State& state) {
    FdtdState s = make_state(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        if constexpr (Parallel)
            fdtd_step(s, 2);
        else
            reference::fdtd_step(s, 2);
        benchmark::DoNotOptimize(s.cur.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(s.cur.size()));
}

template <bool Parallel>
void BM_Covariance(benchmark::State& state) {
    const auto Z = sensor_points(static_cast<int>(state.range(0)));
    const WaveKernel k(preset(3).truth);
    for (auto _ : state) {
        auto M = Parallel ? assemble_covariance(k, std::span<const SpaceTimePoint>(Z))
                          : reference::assemble_covariance(k, std::span<const SpaceTimePoint>(Z));
        benchmark::DoNotOptimize(M.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(Z.size() * (Z.size() + 1) / 2));
}

template <bool Parallel>
void BM_GridPrediction(benchmark::State& state) {
    const auto Z = sensor_points(10);
    const ExperimentConfig cfg = preset(3);
    std::vector<double> y(Z.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(0.1 * static_cast<double>(i));
    const WaveKernel k(cfg.truth);
    const auto model = fit_posterior(k, std::span<const SpaceTimePoint>(Z), std::span<const double>(y),
                                     cfg.truth.lambda);
    GridSpec g;
    g.dx = 1.0 / (state.range(0) - 1);
    g.dims = {static_cast<int>(state.range(0)), static_cast<int>(state.range(0)),
              static_cast<int>(state.range(0))};
    for (auto _ : state) {
        auto f = Parallel ? predict_mean_grid(model, g, 0.0) : reference::predict_mean_grid(model, g, 0.0);
        benchmark::DoNotOptimize(f.values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}

}  // namespace

BENCHMARK(BM_FdtdStep<false>)->Name("fdtd_step/serial")->Arg(25)->Arg(49)->Arg(97);
BENCHMARK(BM_FdtdStep<true>)->Name("fdtd_step/openmp")->Arg(25)->Arg(49)->Arg(97);
BENCHMARK(BM_Covariance<false>)->Name("covariance/serial")->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Covariance<true>)->Name("covariance/openmp")->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridPrediction<false>)->Name("grid_prediction/serial")->Arg(26)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridPrediction<true>)->Name("grid_prediction/openmp")->Arg(26)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
