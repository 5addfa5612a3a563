#include <benchmark/benchmark.h>

#include "mmslu/metrics.hpp"
#include "mmslu/random.hpp"

using namespace mmslu;

namespace {

void BM_IntentMetrics(benchmark::State& state) {
  Rng rng(2);
  const std::vector<std::string> labels{"a", "b", "c", "d", "e", "f", "g", "h", "i"};
  std::vector<std::string> gold, pred;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    gold.push_back(labels[rng.index(labels.size())]);
    pred.push_back(labels[rng.index(labels.size())]);
  }
  for (auto _ : state) benchmark::DoNotOptimize(intent_metrics(gold, pred, labels));
}
BENCHMARK(BM_IntentMetrics)->Arg(1000)->Arg(100000);

void BM_SlotSpans(benchmark::State& state) {
  Rng rng(3);
  const std::vector<std::string> tags{"O", "O", "Location", "Person", "Object"};
  std::vector<std::vector<std::string>> gold(static_cast<std::size_t>(state.range(0))), pred;
  for (auto& seq : gold) {
    for (int t = 0; t < 10; ++t) seq.push_back(tags[rng.index(tags.size())]);
  }
  pred = gold;
  for (auto& seq : pred) seq[rng.index(seq.size())] = "O";
  for (auto _ : state) benchmark::DoNotOptimize(slot_metrics(gold, pred, SlotMode::Span));
}
BENCHMARK(BM_SlotSpans)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
