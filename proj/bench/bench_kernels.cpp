// Serial reference (jobs = 1) against the OpenMP path (jobs = 0, the OpenMP
// default) for the data-parallel maps. Results are identical by
// construction; only the time differs.

#include <benchmark/benchmark.h>

#include "wedgeheat/convolution.hpp"
#include "wedgeheat/verify.hpp"

using namespace wedgeheat;

namespace {

Exec exec_of(const benchmark::State& state) { return Exec{static_cast<int>(state.range(0))}; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 1 ? "serial" : "openmp"); }

void BM_KernelCloud(benchmark::State& state) {
  const KernelConfig cfg{AngularDomain(1.5 * kPi)};
  CloudSpec spec;
  spec.n = 2000;
  const auto cloud = sample_kernel_cloud(cfg.domain, spec);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_cloud(cfg, cloud.samples, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.samples.size()));
  label(state);
}

void BM_KernelMass(benchmark::State& state) {
  const KernelConfig cfg{AngularDomain(kPi / 2)};
  const GridSpec quad{1e-6, 13.0, 48, 1.5, 16, 4};
  for (auto _ : state) benchmark::DoNotOptimize(kernel_mass(cfg, 1.0, {1.0, kPi / 4}, quad, exec_of(state)));
  label(state);
}

NoiseSpec bench_noise(double k0) {
  const auto field = SpatialField::separable(
      1, RadialProfile::power_cutoff(1.0, kPi / k0, SmoothCutoff::smooth(0.25, 0.5)));
  return NoiseSpec{{{1, field, TimeSchedule::constant()}}};
}

void BM_VarianceField(benchmark::State& state) {
  const double k0 = 1.5 * kPi;
  const KernelConfig cfg{AngularDomain(k0)};
  const PolarGrid grid(cfg.domain, GridSpec::decades(1e-3, 3, 4, 4, 2));
  const std::vector<double> times{0.25, 0.5, 1.0};
  const auto noise = bench_noise(k0);
  for (auto _ : state) benchmark::DoNotOptimize(variance_field(cfg, noise, times, grid, {}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size() * times.size()));
  label(state);
}

void BM_MonteCarlo(benchmark::State& state) {
  const double k0 = 1.5 * kPi;
  const KernelConfig cfg{AngularDomain(k0)};
  const PolarPoint probes[] = {{0.1, k0 / 2}, {0.3, k0 / 3}};
  const auto noise = bench_noise(k0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc_sample_w(cfg, noise, 0.5, probes, 10000, 1, 2.0, {}, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
  label(state);
}

}  // namespace

BENCHMARK(BM_KernelCloud)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelMass)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VarianceField)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
