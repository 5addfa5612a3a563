#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "mmslu/acoustic.hpp"
#include "mmslu/random.hpp"

using namespace mmslu;

namespace {

AudioClip noisy_tone(double seconds) {
  Rng rng(4);
  AudioClip clip{{}, 16000.0};
  const auto n = static_cast<std::size_t>(seconds * clip.sample_rate);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / clip.sample_rate;
    clip.samples.push_back(0.3 * std::sin(2 * std::numbers::pi * 220.0 * t) + 0.05 * rng.normal());
  }
  return clip;
}

void BM_Filterbank(benchmark::State& state) {
  const AudioClip clip = noisy_tone(static_cast<double>(state.range(0)) / 1000.0);
  const LldConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(filterbank_energies(clip, cfg));
}
BENCHMARK(BM_Filterbank)->Arg(500)->Arg(3000);

void BM_ExtractUtterance(benchmark::State& state) {
  const AudioClip clip = noisy_tone(static_cast<double>(state.range(0)) / 1000.0);
  const LldConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(extract_utterance(clip, cfg));
}
BENCHMARK(BM_ExtractUtterance)->Arg(500)->Arg(3000);

}  // namespace

BENCHMARK_MAIN();
