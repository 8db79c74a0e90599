#include <benchmark/benchmark.h>

#include "bench_common.hpp"

namespace {

void BM_SobolSequence(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dcpl::sobol_sequence(n, 4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SobolSequence)->Arg(1 << 12)->Arg(1 << 16);

void BM_PersonDraws(benchmark::State& state) {
  dcpl::SobolConfig cfg;
  cfg.dimensions = 4;
  cfg.draws_per_person = 496;
  for (auto _ : state) benchmark::DoNotOptimize(dcpl::build_person_draws(cfg, 200));
}
BENCHMARK(BM_PersonDraws);

void evaluate(benchmark::State& state, const dcpl::ChoiceModel& model,
              const dcpl::ParameterVector& at) {
  const auto detail = static_cast<dcpl::EvalDetail>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate(at, detail));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(model.data().persons()));
}

void BM_MnlLoglik(benchmark::State& state) {
  const auto ds = bench::dataset(bench::mnl_spec(), bench::mnl_point(), state.range(0));
  const auto model = dcpl::make_model(bench::mnl_spec(), ds);
  evaluate(state, *model, bench::mnl_point());
}
BENCHMARK(BM_MnlLoglik)->ArgsProduct({{250, 1000}, {0, 1, 2}});

void BM_LatentClassLoglik(benchmark::State& state) {
  const auto ds = bench::dataset(bench::lc_spec(), bench::lc_point(), state.range(0));
  const auto model = dcpl::make_model(bench::lc_spec(), ds);
  evaluate(state, *model, bench::lc_point());
}
BENCHMARK(BM_LatentClassLoglik)->ArgsProduct({{250, 1000}, {0, 1, 2}});

void BM_MixedLogitLoglik(benchmark::State& state) {
  const auto persons = static_cast<std::size_t>(state.range(0));
  const auto ds = bench::dataset(bench::mmnl_spec(), bench::mmnl_point(), persons);
  dcpl::SobolConfig cfg;
  cfg.dimensions = 4;
  cfg.draws_per_person = 250;
  const auto draws = std::make_shared<const dcpl::DrawMatrix>(dcpl::build_person_draws(cfg, persons));
  const auto model = dcpl::make_model(bench::mmnl_spec(), ds, draws);
  evaluate(state, *model, bench::mmnl_point());
}
BENCHMARK(BM_MixedLogitLoglik)->ArgsProduct({{100, 400}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
