#include <benchmark/benchmark.h>

#include "bench_common.hpp"

namespace {

void BM_MnlMaximize(benchmark::State& state) {
  const auto ds = bench::dataset(bench::mnl_spec(), bench::mnl_point(), 1000);
  const auto model = dcpl::make_model(bench::mnl_spec(), ds);
  const auto objective = dcpl::make_objective(*model);
  const dcpl::ParameterVector start = model->template_parameters();
  for (auto _ : state) benchmark::DoNotOptimize(dcpl::maximize(objective, start));
}
BENCHMARK(BM_MnlMaximize)->Unit(benchmark::kMillisecond);

void BM_HessianAndCovariance(benchmark::State& state) {
  const auto ds = bench::dataset(bench::lc_spec(), bench::lc_point(), 500);
  const auto model = dcpl::make_model(bench::lc_spec(), ds);
  const dcpl::EstimationResult base = dcpl::maximize(dcpl::make_objective(*model), bench::lc_point());
  for (auto _ : state) {
    dcpl::EstimationResult r = base;
    dcpl::attach_inference(r, *model);
    benchmark::DoNotOptimize(r.covariance);
  }
}
BENCHMARK(BM_HessianAndCovariance)->Unit(benchmark::kMillisecond);

// One profile pass; M grid points per parameter.
void BM_MnlProfilePass(benchmark::State& state) {
  const auto ds = bench::dataset(bench::mnl_spec(), bench::mnl_point(), 500);
  const auto model = dcpl::make_model(bench::mnl_spec(), ds);
  dcpl::EstimationResult base =
      dcpl::maximize(dcpl::make_objective(*model), model->template_parameters());
  dcpl::attach_inference(base, *model);
  dcpl::ProfileSettings settings;
  settings.points = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dcpl::run_profile(*model, base, settings));
}
BENCHMARK(BM_MnlProfilePass)->Arg(11)->Arg(51)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
