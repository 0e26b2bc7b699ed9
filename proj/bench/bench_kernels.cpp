#include <benchmark/benchmark.h>

#include <vector>

#include "pvgas/ensemble.hpp"
#include "pvgas/kernels.hpp"
#include "pvgas/rng.hpp"
#include "pvgas/spectral.hpp"

namespace {

using namespace pvgas;

struct Points {
  std::vector<Vec2> x;
  std::vector<double> xi;
};

Points points(std::size_t n) {
  Rng rng(42, stream_id(0xBE4C, n));
  const auto c = ensemble::VortexConfiguration::uniform(n, rng);
  return {c.positions(), c.intensities()};
}

const spectral::SpectralBasis& basis() {
  static const auto b = [] {
    spectral::BasisOptions o;
    o.modes = 500;
    return spectral::SpectralBasis::build(o);
  }();
  return b;
}

template <double (*F)(std::span<const Vec2>, std::span<const double>)>
void BM_PairEnergy(benchmark::State& state) {
  const auto p = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(F(p.x, p.xi));
  state.SetComplexityN(state.range(0));
}

template <void (*F)(std::span<const Vec2>, std::span<const double>, double, std::span<Vec2>)>
void BM_Velocity(benchmark::State& state) {
  const auto p = points(static_cast<std::size_t>(state.range(0)));
  std::vector<Vec2> out(p.x.size());
  for (auto _ : state) {
    F(p.x, p.xi, 1.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <void (*F)(const spectral::SpectralBasis&, std::span<const Vec2>, std::span<const double>,
                    std::span<double>)>
void BM_ModeProjection(benchmark::State& state) {
  const auto p = points(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(basis().size());
  for (auto _ : state) {
    F(basis(), p.x, p.xi, out);
    benchmark::DoNotOptimize(out.data());
  }
}

BENCHMARK(BM_PairEnergy<kernels::serial::pair_energy>)->Name("pair_energy/serial")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_PairEnergy<kernels::omp::pair_energy>)->Name("pair_energy/omp")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_Velocity<kernels::serial::velocity>)->Name("velocity/serial")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_Velocity<kernels::omp::velocity>)->Name("velocity/omp")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_ModeProjection<kernels::serial::mode_projection>)->Name("mode_projection/serial")->Arg(100)->Arg(1000);
BENCHMARK(BM_ModeProjection<kernels::omp::mode_projection>)->Name("mode_projection/omp")->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
