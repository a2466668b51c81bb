#include <benchmark/benchmark.h>

#include "uaml/edl.hpp"
#include "uaml/inference.hpp"
#include "uaml/oracle.hpp"
#include "uaml/problog.hpp"
#include "uaml/scenario.hpp"

namespace {

using namespace uaml;

const NetworkSpec& route_network() {
  static const NetworkSpec net = scenario::learn_scenario_network(1, 100);
  return net;
}

const EvidenceSet& row4() {
  static const EvidenceSet ev = scenario::canonical_rows()[3].evidence;
  return ev;
}

void BM_BpPoint(benchmark::State& state) {
  const PointNetwork pn = mean_network(route_network());
  for (auto _ : state) benchmark::DoNotOptimize(bp_point(pn, row4()));
}
BENCHMARK(BM_BpPoint);

void BM_Enumerate(benchmark::State& state) {
  const PointNetwork pn = mean_network(route_network());
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_posterior(pn, row4()));
}
BENCHMARK(BM_Enumerate);

void BM_InferSubjective(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(infer_subjective(route_network(), row4()));
}
BENCHMARK(BM_InferSubjective);

void BM_AttributeAll(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(attribute_all(route_network(), row4()));
}
BENCHMARK(BM_AttributeAll)->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state) {
  OracleConfig cfg;
  cfg.n_samples = static_cast<std::size_t>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(oracle_infer(route_network(), row4(), cfg));
}
BENCHMARK(BM_Oracle)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Scenario(benchmark::State& state) {
  scenario::ScenarioConfig cfg;
  cfg.n_seeds = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scenario::run_scenario(cfg));
}
BENCHMARK(BM_Scenario)->Arg(1)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_ProblogExact(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < state.range(0); ++i) {
    text += "0.3::f" + std::to_string(i) + ".\nq :- f" + std::to_string(i) + ".\n";
  }
  const auto prog = problog::parse_program(text);
  for (auto _ : state) benchmark::DoNotOptimize(problog::success_probability(prog, {"q", {}}));
}
BENCHMARK(BM_ProblogExact)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_EdlEpoch(benchmark::State& state) {
  const auto data = edl::make_synthetic(1);
  const edl::ToyClassifier model(16, 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(model.gradient(data.points, 1.0));
}
BENCHMARK(BM_EdlEpoch);

}  // namespace

BENCHMARK_MAIN();
