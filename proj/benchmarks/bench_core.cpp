#include <benchmark/benchmark.h>

#include "spectralflow/bloch_dos.hpp"
#include "spectralflow/eigencount.hpp"
#include "spectralflow/hamiltonian.hpp"

namespace {

using namespace spectralflow;

ModelSpec gapped_1d() {
  return ModelSpec(1, {2, 1, 1}, {0.0, 3.0}, PsiProfile::make_constant(1.0), 2.0, 0.0);
}

void BM_Assemble1d(benchmark::State& state) {
  const auto model = gapped_1d();
  const auto domain = LatticeDomain::ball(1, double(state.range(0)) + 0.5);
  for (auto _ : state) {
    auto op = assemble(domain, model);
    benchmark::DoNotOptimize(op.matrix);
  }
}
BENCHMARK(BM_Assemble1d)->Arg(1000)->Arg(10000);

void BM_CountBelowSturm(benchmark::State& state) {
  const auto model = gapped_1d();
  const auto op = assemble(model.dim() == 1
                               ? LatticeDomain::ball(1, double(state.range(0)) + 0.5)
                               : LatticeDomain::ball(2, 30.5),
                           model);
  for (auto _ : state) benchmark::DoNotOptimize(count_below(op, 3.51));
}
BENCHMARK(BM_CountBelowSturm)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_CountBelowLdlt2d(benchmark::State& state) {
  const ModelSpec model(2, {2, 2, 1}, {0.0, 3.0, 3.0, 0.0},
                        PsiProfile::make_constant(1.0), 2.0, 0.0);
  const auto op = assemble(LatticeDomain::ball(2, double(state.range(0)) + 0.5), model);
  for (auto _ : state) benchmark::DoNotOptimize(count_below(op, 5.51));
}
BENCHMARK(BM_CountBelowLdlt2d)->Arg(20)->Arg(40);

void BM_IdsBloch(benchmark::State& state) {
  const auto model = gapped_1d();
  for (auto _ : state) benchmark::DoNotOptimize(ids_bloch(model, 1.3, int(state.range(0))));
}
BENCHMARK(BM_IdsBloch)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
