// Serial reference loop vs OpenMP loop for the scan kernels. Thread count
// follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "vapor/beam.hpp"
#include "vapor/experiment.hpp"

using namespace vapor;

namespace {

ScanConfig intensity_config() {
  ScanConfig c;
  c.n_points = 20001;
  c.noise.relative_sigma = 0.01;
  return c;
}

// Reduced grid and point count keep one iteration near a second.
ScanConfig pinhole_config() {
  ScanConfig c;
  c.pinhole.enabled = true;
  c.grid = {512, 20.0};
  c.freq_start_mhz = -0.2;
  c.freq_stop_mhz = 0.2;
  c.n_points = 16;
  return c;
}

void intensity_scan(benchmark::State& state, Execution exec) {
  const ScanConfig c = intensity_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_intensity_scan(c, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(c.n_points));
}

void pinhole_scan(benchmark::State& state, Execution exec) {
  const ScanConfig c = pinhole_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_pinhole_scan(c, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(c.n_points));
}

void medium_and_propagate(benchmark::State& state) {
  const GridSpec grid{static_cast<std::size_t>(state.range(0)), 15.0};
  const ComplexField probe = gaussian_field(GaussianBeam{}, grid);
  const AngularSpectrumPropagator prop(grid.size, grid.pitch_um, 780.2, 2.5);
  for (auto _ : state) {
    ComplexField f = apply_medium(probe, InducedLens{1e-6, 1.2, 7.5, -2.0});
    prop.apply(f);
    benchmark::DoNotOptimize(f.total_power());
  }
}

}  // namespace

BENCHMARK_CAPTURE(intensity_scan, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(intensity_scan, parallel, Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(pinhole_scan, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(pinhole_scan, parallel, Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(medium_and_propagate)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
