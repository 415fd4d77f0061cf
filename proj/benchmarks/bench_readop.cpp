#include "readop/basis.hpp"
#include "readop/experiments.hpp"
#include "readop/lad.hpp"
#include "readop/operator.hpp"
#include "readop/witness.hpp"

#include <benchmark/benchmark.h>

#include <memory>

namespace {

using namespace readop;

std::shared_ptr<const Schedule> fixture() {
  static const auto s = std::make_shared<const Schedule>(Schedule::fixture());
  return s;
}

void BM_Classify(benchmark::State& state) {
  const Schedule& s = *fixture();
  long i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.classify(Int(i)));
    i = (i + 7919) % 20000;
  }
}
BENCHMARK(BM_Classify);

// Fresh system each round so the memo table does not hide the recursion.
void BM_EInFCold(benchmark::State& state) {
  const Int i(state.range(0));
  for (auto _ : state) {
    const BasisSystem basis(fixture());
    benchmark::DoNotOptimize(basis.e_in_f(i));
  }
}
BENCHMARK(BM_EInFCold)->Arg(328)->Arg(1229)->Arg(11800);

void BM_SColumnFormula(benchmark::State& state) {
  const Int i(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(s_column_formula(*fixture(), i));
}
BENCHMARK(BM_SColumnFormula)->Arg(4)->Arg(327)->Arg(11800);

void BM_SColumnDirect(benchmark::State& state) {
  const Int i(state.range(0));
  for (auto _ : state) {
    const BasisSystem basis(fixture());
    benchmark::DoNotOptimize(s_column_direct(basis, i));
  }
}
BENCHMARK(BM_SColumnDirect)->Arg(4)->Arg(327)->Arg(11800);

void BM_ColumnNorms(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(column_norms(*fixture(), Int(0), Int(state.range(0))));
}
BENCHMARK(BM_ColumnNorms)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_ConstantC(benchmark::State& state) {
  const auto basis = std::make_shared<const BasisSystem>(fixture());
  const WitnessParams w = choose_params(basis, {});
  for (auto _ : state) benchmark::DoNotOptimize(constant_c(w));
}
BENCHMARK(BM_ConstantC)->Unit(benchmark::kMillisecond);

void BM_NonAdjoint(benchmark::State& state) {
  for (auto _ : state) {
    const auto basis = std::make_shared<const BasisSystem>(fixture());
    benchmark::DoNotOptimize(nonadjoint_rows(basis, 1, 3));
  }
}
BENCHMARK(BM_NonAdjoint)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
