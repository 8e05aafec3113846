#include <benchmark/benchmark.h>

#include "swiss/combiners.hpp"
#include "swiss/experiment.hpp"
#include "swiss/linalg.hpp"
#include "swiss/metrics.hpp"

namespace {

using namespace swiss;

// Merge time for 10 batches of 5000 exact draws at dimension state.range(0).
template <CombineMethod M>
void BM_Combine(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const GaussianSuiteRun g = prepare_gaussian_suite(d, 10, 5000, 10, 7, 0);
  const auto& batches = uses_inflated_batches(M) ? g.inflated : g.sub_posterior;
  for (auto _ : state) benchmark::DoNotOptimize(combine(M, batches).combined.data());
  state.SetItemsProcessed(state.iterations() * 10 * 5000);
}

BENCHMARK_TEMPLATE(BM_Combine, CombineMethod::Swiss)->Arg(5)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Combine, CombineMethod::Consensus)->Arg(5)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Combine, CombineMethod::AverageRecentring)->Arg(5)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Combine, CombineMethod::Barycenter)->Arg(5)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_Spsq(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const GaussianSuite s = gaussian_conjugate_suite(d, 1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(spsq(s.batches[0].cov).matrix().data());
}
BENCHMARK(BM_Spsq)->Arg(5)->Arg(20)->Arg(80);

void BM_Iad(benchmark::State& state) {
  const GaussianSuiteRun g = prepare_gaussian_suite(5, 10, 5000, 50000, 11, 0);
  const Matrix approx = combine(CombineMethod::Swiss, g.inflated).combined;
  for (auto _ : state) benchmark::DoNotOptimize(iad(approx, g.reference).total);
}
BENCHMARK(BM_Iad)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
