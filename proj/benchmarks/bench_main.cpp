#include <benchmark/benchmark.h>

#include "spinesim/analysis.hpp"
#include "spinesim/auxiliary.hpp"
#include "spinesim/population.hpp"

using namespace spinesim;

namespace {

ModelSpec model(const char* text) { return build_model(nlohmann::json::parse(text)); }

void BM_SimulateYule(benchmark::State& state) {
  const auto spec = model(R"({"id":"yule","b":1,"m":2})");
  const double horizon = static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  std::size_t cells = 0;
  for (auto _ : state) {
    const auto tree = simulate_population(spec, {0.0}, horizon, {}, RandomStream{seed++});
    cells += tree.size();
    benchmark::DoNotOptimize(cells);
  }
  state.counters["cells/s"] = benchmark::Counter(static_cast<double>(cells), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateYule)->Arg(4)->Arg(8);

void BM_SimulateParasite(benchmark::State& state) {
  const auto spec = model(R"({"id":"parasite","g":1,"sigma2":0.25,"alpha":1,"beta":0.5})");
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_population(spec, {1.0}, 2.0, {}, RandomStream{seed++}));
}
BENCHMARK(BM_SimulateParasite);

void BM_AuxiliaryExpGrowth(benchmark::State& state) {
  const auto spec = model(R"({"id":"exp_growth","a":0.1,"alpha":0.1})");
  RandomStream rng{1};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_auxiliary(spec, 1.0, 30.0, rng));
}
BENCHMARK(BM_AuxiliaryExpGrowth);

void BM_AuxiliaryPlasmid(benchmark::State& state) {
  const auto spec = model(R"({"id":"plasmid_bd","lambda":1.5,"mu":0.5})");
  RandomStream rng{2};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_auxiliary(spec, 3.0, 1.0, rng));
}
BENCHMARK(BM_AuxiliaryPlasmid);

void BM_MeanPopulationSwitch(benchmark::State& state) {
  const auto spec = model(R"({"id":"two_type_switch","b0":1,"b1":3,"p":0.2})");
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_population(spec, 1.0, 0.0, t));
    t += 1e-6;
  }
}
BENCHMARK(BM_MeanPopulationSwitch);

void BM_ManyToOneCheck(benchmark::State& state) {
  const auto spec = model(R"({"id":"exp_growth","a":0.1,"alpha":0.1})");
  CheckOptions o;
  o.n_pop = o.n_aux = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(check_many_to_one(spec, 1.0, 10.0, Functional::terminal(), o, RandomStream{3}));
}
BENCHMARK(BM_ManyToOneCheck)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
