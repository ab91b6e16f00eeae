#include <benchmark/benchmark.h>

#include <numbers>

#include "lagmcf/analysis.hpp"
#include "lagmcf/flow.hpp"
#include "lagmcf/grid.hpp"
#include "lagmcf/initdata.hpp"

using namespace lagmcf;

namespace {

Potential cosine_2d(std::size_t n) {
  Preset p;
  p.kind = PresetKind::cosine;
  p.amplitude = 0.3;
  return make_preset(p, GridSpec::cube(2, n, 2.0 * std::numbers::pi));
}

void BM_Hessian(benchmark::State& st) {
  const Potential u = cosine_2d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(hessian(u.periodic()));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(u.grid().size()));
}
BENCHMARK(BM_Hessian)->Arg(64)->Arg(256);

void BM_ThirdDerivatives(benchmark::State& st) {
  const Potential u = cosine_2d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(third_derivatives(u.periodic()));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(u.grid().size()));
}
BENCHMARK(BM_ThirdDerivatives)->Arg(64)->Arg(256);

void BM_PotentialStep(benchmark::State& st) {
  const FlowState s{cosine_2d(static_cast<std::size_t>(st.range(0))), 0.0, 0};
  const double dt = cfl_dt(s.u.grid(), 0.5);
  const auto scheme = st.range(1) ? Scheme::rk2 : Scheme::euler;
  for (auto _ : st) benchmark::DoNotOptimize(potential_step(s, dt, scheme));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.u.grid().size()));
}
BENCHMARK(BM_PotentialStep)->Args({64, 0})->Args({256, 0})->Args({256, 1});

void BM_Diagnostics(benchmark::State& st) {
  const FlowState s{cosine_2d(static_cast<std::size_t>(st.range(0))), 0.0, 0};
  for (auto _ : st) benchmark::DoNotOptimize(diagnostics(s, 0.1));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.u.grid().size()));
}
BENCHMARK(BM_Diagnostics)->Arg(64)->Arg(256);

void BM_Mollify(benchmark::State& st) {
  const Potential u = cosine_2d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(mollify(u.periodic(), 0.05));
}
BENCHMARK(BM_Mollify)->Arg(64)->Arg(256);

}  // namespace
BENCHMARK_MAIN();
