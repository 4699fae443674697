#include <benchmark/benchmark.h>

#include "ult/fixtures.hpp"
#include "ult/model.hpp"
#include "ult/stability.hpp"

using namespace ult;

namespace {

ControlParams nominal_control() {
  ControlParams cp;
  cp.vx_des = kNominalVxDes;
  cp.l0_swing = 1.0 - kNominalRetraction;
  return cp;
}

void BM_FlightDerivative(benchmark::State& st) {
  const ModelParams mp;
  const SystemState s = embed(nominal_fixed_point());
  for (auto _ : st) benchmark::DoNotOptimize(flight_derivative(s, {10.0, -0.087}, mp));
}
BENCHMARK(BM_FlightDerivative);

void BM_ApexMap(benchmark::State& st) {
  const ModelParams mp;
  const ControlParams cp = nominal_control();
  const SectionState z = nominal_fixed_point();
  for (auto _ : st) benchmark::DoNotOptimize(poincare_map(z, mp, cp));
}
BENCHMARK(BM_ApexMap)->Unit(benchmark::kMillisecond);

void BM_Linearize(benchmark::State& st) {
  const ModelParams mp;
  const VectorMap map = section_map(mp, nominal_control());
  const Eigen::VectorXd x = to_eigen(nominal_fixed_point());
  for (auto _ : st) benchmark::DoNotOptimize(linearize(map, x));
}
BENCHMARK(BM_Linearize)->Unit(benchmark::kMillisecond);

void BM_SweepRow(benchmark::State& st) {
  const ModelParams mp;
  SweepGrid g;
  g.vx = {5.0, 5.0, 0.1};
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        sweep(g, RetractionMode::Relative, nominal_fixed_point(), mp, nominal_control(), 100, 1));
  }
}
BENCHMARK(BM_SweepRow)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
