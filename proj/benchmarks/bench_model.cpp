#include <benchmark/benchmark.h>

#include "mmslu/model.hpp"
#include "mmslu/optim.hpp"
#include "mmslu/random.hpp"
#include "mmslu/synth.hpp"

using namespace mmslu;

namespace {

struct Setup {
  SyntheticData data;
  std::shared_ptr<const CompositeEmbedder> embedder;

  explicit Setup(std::size_t n) {
    GeneratorConfig g;
    g.n_utterances = n;
    g.ambiguous_fraction = 0.1;
    data = generate_synthetic(g);
    embedder = std::make_shared<const CompositeEmbedder>(
        std::vector<std::shared_ptr<const EmbeddingTable>>{
            std::make_shared<const EmbeddingTable>(data.text_embeddings)},
        std::vector<OovPolicy>{OovPolicy::ZeroFill});
  }
};

ModelConfig config(std::size_t hidden, bool acoustic) {
  ModelConfig c;
  c.hidden_dim = hidden;
  if (acoustic) c.fusion.features = {{UtteranceFeature::Acoustic, 32, 128}};
  return c;
}

void BM_BiLstmForward(benchmark::State& state) {
  const auto H = static_cast<std::size_t>(state.range(0));
  const auto T = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  const BiLstm net = BiLstm::initialized(64, H, rng);
  std::vector<Vector> inputs(T, Vector(64));
  for (auto& x : inputs) for (double& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(bilstm_forward(inputs, net.forward, net.backward));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_BiLstmForward)->Args({32, 8})->Args({64, 8})->Args({64, 32})->Args({128, 16});

void BM_Predict(benchmark::State& state) {
  static const Setup setup(50);
  const HJoint2Model model(config(static_cast<std::size_t>(state.range(0)), true), setup.embedder, 1);
  const auto& u = setup.data.corpus.utterances.front();
  UtteranceFeatures f;
  f.acoustic = setup.data.acoustic.at(u.id);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(u.tokens, f));
}
BENCHMARK(BM_Predict)->Arg(32)->Arg(64);

void BM_TrainStep(benchmark::State& state) {
  static const Setup setup(50);
  HJoint2Model model(config(static_cast<std::size_t>(state.range(0)), true), setup.embedder, 1);
  AttachedFeatures attached;
  for (const auto& u : setup.data.corpus.utterances) {
    attached.features.push_back({setup.data.acoustic.at(u.id), std::nullopt, std::nullopt});
  }
  const auto examples = build_examples(setup.data.corpus, &attached, model.config());
  const ModelParams& view = model.params();
  AdamState adam = make_adam_state(view.tensors());
  std::size_t k = 0;
  for (auto _ : state) {
    ModelParams grads = model.params().zeros_like();
    benchmark::DoNotOptimize(model.loss_and_gradient(examples[k++ % examples.size()], 1.0, &grads));
    adam_step(model.params().tensors(), static_cast<const ModelParams&>(grads).tensors(), adam);
  }
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
