#include <benchmark/benchmark.h>

#include <string>

#include "pwdyn/induction.hpp"
#include "pwdyn/orbit.hpp"
#include "pwdyn/serialize.hpp"

using namespace pwdyn;

namespace {

PiecewiseMap load(const char* name) {
  return build_map(load_map_spec(std::string(PWDYN_FIXTURE_DIR) + "/" + name + ".json"));
}

void BM_OrbitSteps(benchmark::State& st) {
  const PiecewiseMap m = load("logistic4");
  NoisyStepper step(m, {1e-13, 1});
  double x = 0.1234;
  for (auto _ : st) {
    for (int i = 0; i < 1000; ++i) x = step(x);
    benchmark::DoNotOptimize(x);
  }
  st.SetItemsProcessed(st.iterations() * 1000);
}
BENCHMARK(BM_OrbitSteps);

void BM_FindPeriodicPoints(benchmark::State& st) {
  const PiecewiseMap m = load("logistic4");
  for (auto _ : st) benchmark::DoNotOptimize(find_periodic_points(m, static_cast<std::size_t>(st.range(0))));
}
BENCHMARK(BM_FindPeriodicPoints)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FirstReturnDoubling(benchmark::State& st) {
  const PiecewiseMap m = load("doubling");
  for (auto _ : st) benchmark::DoNotOptimize(first_return(m, {0.0, 0.5}, 50));
}
BENCHMARK(BM_FirstReturnDoubling)->Unit(benchmark::kMicrosecond);

void BM_FirstReturnTent(benchmark::State& st) {
  const PiecewiseMap m = load("tent");
  const Interval J = *find_nice_interval(m, 2.0 / 3.0, 0.1, 200);
  InductionConfig cfg;
  cfg.target_uncovered = 1e-2;
  for (auto _ : st) benchmark::DoNotOptimize(first_return(m, J, 50, cfg));
}
BENCHMARK(BM_FirstReturnTent)->Unit(benchmark::kMillisecond);

void BM_BasinSample(benchmark::State& st) {
  const PiecewiseMap m = load("logistic3.2");
  BasinConfig cfg;
  cfg.threads = 1;
  for (auto _ : st) benchmark::DoNotOptimize(basin_sample(m, 64, 1, cfg));
}
BENCHMARK(BM_BasinSample)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
