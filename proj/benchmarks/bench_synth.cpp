#include <benchmark/benchmark.h>

#include "sonibot/synth.hpp"

using namespace sonibot;

static void BM_RenderBlock(benchmark::State& state) {
  synth::SynthConfig cfg;
  cfg.block_size = static_cast<int>(state.range(0));
  synth::Synthesizer synth(cfg);
  synth.set_params({0.6, 660.0, 0.12, true});
  std::vector<float> block(static_cast<std::size_t>(cfg.block_size));
  for (auto _ : state) {
    synth.render(block);
    benchmark::DoNotOptimize(block.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RenderBlock)->Arg(64)->Arg(256)->Arg(1024);

// Retargets every block so the ramp path is always active.
static void BM_RenderBlockRamping(benchmark::State& state) {
  synth::Synthesizer synth;
  std::vector<float> block(256);
  bool high = false;
  for (auto _ : state) {
    high = !high;
    synth.set_params({high ? 0.8 : 0.3, high ? 800.0 : 300.0, high ? 0.2 : 0.02, true});
    synth.render(block);
    benchmark::DoNotOptimize(block.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_RenderBlockRamping);
