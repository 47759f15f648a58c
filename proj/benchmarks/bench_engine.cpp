#include <benchmark/benchmark.h>

#include <cmath>

#include "sonibot/engine.hpp"
#include "sonibot/scenario.hpp"
#include "sonibot/session.hpp"

using namespace sonibot;

static void BM_EngineStep(benchmark::State& state) {
  const auto actors = static_cast<int>(state.range(0));
  engine::Engine engine(EngineConfig{});
  std::uint64_t k = 0;
  std::vector<engine::ActorInput> input(static_cast<std::size_t>(actors));
  for (int i = 0; i < actors; ++i) input[std::size_t(i)].actor = "a" + std::to_string(i);
  for (auto _ : state) {
    const double t = static_cast<double>(k++) / 30.0;
    for (int i = 0; i < actors; ++i) {
      auto& a = input[std::size_t(i)];
      a.pose = {1.0 + 0.5 * std::sin(t + i), 0.3 * i - 0.5, 180.0};
    }
    benchmark::DoNotOptimize(engine.step({t, input, {}}));
  }
}
BENCHMARK(BM_EngineStep)->Arg(1)->Arg(4)->Arg(16);

static void BM_RenderScenario(benchmark::State& state) {
  const auto s = *scenario::bundled_scenario("fig5_approach_leave");
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(s, EngineConfig{}));
}
BENCHMARK(BM_RenderScenario)->Unit(benchmark::kMillisecond);
