#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "sonibot/spectral.hpp"

using namespace sonibot;

static void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::complex<double>> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.01 * double(i));
  for (auto _ : state) {
    auto y = x;
    spectral::fft(y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Fft)->Arg(1024)->Arg(2048)->Arg(1 << 16);

static void BM_Stft(benchmark::State& state) {
  std::vector<float> x(44100 * 12);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = float(0.5 * std::sin(2 * std::numbers::pi * 440.0 * double(i) / 44100));
  for (auto _ : state) benchmark::DoNotOptimize(spectral::stft(x, 2048, 1024, 44100));
}
BENCHMARK(BM_Stft)->Unit(benchmark::kMillisecond);
