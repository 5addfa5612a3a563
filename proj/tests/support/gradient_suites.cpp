#include "support/gradient_suites.hpp"

#include <cmath>

#include "mmslu/gradcheck.hpp"
#include "mmslu/layers.hpp"
#include "mmslu/lstm.hpp"
#include "mmslu/model.hpp"
#include "mmslu/random.hpp"
#include "support/fixtures.hpp"

namespace mmslu::support {

namespace {

Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = rng.normal(0.0, scale);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void randomize(Matrix& m, Rng& rng, double scale) {
  for (double& v : m.values()) v = rng.normal(0.0, scale);
}

}  // namespace

double dense_gradient_error(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t in = 2 + rng.index(5), out = 2 + rng.index(5);
  Dense layer(in, out, rng);
  randomize(layer.bias, rng, 0.3);
  Matrix x(in, 1);
  randomize(x, rng, 1.0);
  const Vector probe = random_vector(rng, out);
  const auto loss = [&] { return dot(layer.forward(x.values()), probe); };
  Dense grad = layer.zeros_like();
  Matrix dx(in, 1);
  layer.backward(x.values(), probe, grad, dx.values());
  std::vector<Matrix*> values{&layer.weight, &layer.bias, &x};
  std::vector<const Matrix*> analytic{&grad.weight, &grad.bias, &dx};
  return grad_check(loss, values, analytic);
}

double softmax_ce_gradient_error(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 2 + rng.index(8);
  Matrix logits(n, 1);
  randomize(logits, rng, 2.0);
  const std::size_t gold = rng.index(n);
  const auto loss = [&] { return cross_entropy(softmax(logits.values()), gold); };
  const Vector g = softmax_cross_entropy_grad(softmax(logits.values()), gold);
  Matrix analytic(n, 1, g);
  std::vector<Matrix*> values{&logits};
  std::vector<const Matrix*> grads{&analytic};
  return grad_check(loss, values, grads);
}

double lstm_cell_gradient_error(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t in = 1 + rng.index(4), hidden = 1 + rng.index(4);
  LstmCellParams p = LstmCellParams::initialized(in, hidden, rng);
  Matrix x(in, 1), h(hidden, 1), c(hidden, 1);
  randomize(x, rng, 1.0);
  randomize(h, rng, 0.5);
  randomize(c, rng, 0.5);
  const Vector probe_h = random_vector(rng, hidden), probe_c = random_vector(rng, hidden);
  const auto loss = [&] {
    const LstmStep s = lstm_step(p, x.values(), h.values(), c.values());
    return dot(s.h, probe_h) + dot(s.c, probe_c);
  };
  const LstmStep step = lstm_step(p, x.values(), h.values(), c.values());
  LstmCellParams grad = p.zeros_like();
  Vector dx, dh, dc;
  lstm_step_backward(p, step, probe_h, probe_c, grad, dx, dh, dc);
  Matrix mdx(in, 1, dx), mdh(hidden, 1, dh), mdc(hidden, 1, dc);
  std::vector<Matrix*> values;
  p.collect(values);
  values.insert(values.end(), {&x, &h, &c});
  std::vector<const Matrix*> analytic;
  grad.collect(analytic);
  analytic.insert(analytic.end(), {&mdx, &mdh, &mdc});
  return grad_check(loss, values, analytic);
}

double bilstm_gradient_error(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t in = 1 + rng.index(3), hidden = 1 + rng.index(3), T = 1 + rng.index(4);
  BiLstm net = BiLstm::initialized(in, hidden, rng);
  std::vector<Matrix> xs;
  for (std::size_t t = 0; t < T; ++t) {
    xs.emplace_back(in, 1);
    randomize(xs.back(), rng, 1.0);
  }
  std::vector<Vector> probes;
  for (std::size_t t = 0; t < T; ++t) probes.push_back(random_vector(rng, 2 * hidden));
  const auto inputs = [&] {
    std::vector<Vector> v;
    for (const auto& m : xs) v.emplace_back(m.values().begin(), m.values().end());
    return v;
  };
  const auto loss = [&] {
    const auto outs = bilstm_forward(inputs(), net.forward, net.backward);
    double s = 0.0;
    for (std::size_t t = 0; t < T; ++t) s += dot(outs[t], probes[t]);
    return s;
  };
  const BiLstmTrace trace = bilstm_trace(net, inputs());
  BiLstm grad = net.zeros_like();
  const auto dxs = bilstm_backward(net, trace, probes, grad);
  std::vector<Matrix> mdx;
  for (const auto& d : dxs) mdx.emplace_back(in, 1, d);
  std::vector<Matrix*> values;
  net.collect(values);
  for (auto& m : xs) values.push_back(&m);
  std::vector<const Matrix*> analytic;
  grad.collect(analytic);
  for (const auto& m : mdx) analytic.push_back(&m);
  return grad_check(loss, values, analytic);
}

double projection_gradient_error(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t in = 2 + rng.index(6), out = 1 + rng.index(4);
  Dense layer(in, out, rng);
  Matrix x(in, 1);
  randomize(x, rng, 1.0);
  const Vector probe = random_vector(rng, out);
  const auto forward = [&] {
    Vector y = layer.forward(x.values());
    for (double& v : y) v = std::tanh(v);
    return y;
  };
  const auto loss = [&] { return dot(forward(), probe); };
  const Vector y = forward();
  Vector dpre(out);
  for (std::size_t j = 0; j < out; ++j) dpre[j] = probe[j] * (1.0 - y[j] * y[j]);
  Dense grad = layer.zeros_like();
  Matrix dx(in, 1);
  layer.backward(x.values(), dpre, grad, dx.values());
  std::vector<Matrix*> values{&layer.weight, &layer.bias, &x};
  std::vector<const Matrix*> analytic{&grad.weight, &grad.bias, &dx};
  return grad_check(loss, values, analytic);
}

double end_to_end_gradient_error(std::uint64_t seed, bool fine_tune) {
  Rng rng(seed);
  const std::vector<std::string> vocab{"stop", "here", "now", "please"};
  auto words = random_table("words", vocab, 3, Rng::derive(seed, 7).next_u64());
  auto partial = random_table("partial", {"stop", "now"}, 2, Rng::derive(seed, 8).next_u64());
  auto embedder = std::make_shared<const CompositeEmbedder>(
      std::vector<std::shared_ptr<const EmbeddingTable>>{words, partial},
      std::vector<OovPolicy>{OovPolicy::ZeroFill, OovPolicy::TrainableUnk});

  ModelConfig config;
  config.hidden_dim = 4;
  config.fusion.features.push_back({UtteranceFeature::Acoustic, 6, 3});
  config.fine_tune_embeddings = fine_tune;
  if (fine_tune) config.tuned_vocabulary = {"stop", "here"};
  HJoint2Model model(config, embedder, Rng::derive(seed, 9).next_u64());
  // Random biases keep every path away from the symmetric init point.
  for (Matrix* m : model.params().tensors()) {
    for (double& v : m->values()) v += rng.normal(0.0, 0.1);
  }

  TrainingExample ex;
  ex.id = "grad";
  ex.tokens = {vocab[rng.index(4)], "here"};
  const std::size_t tags = config.tags.size();
  ex.tags = {1 + rng.index(tags - 1), rng.index(tags)};
  ex.intent = rng.index(config.intents.size());
  ex.features.acoustic = random_vector(rng, 6);

  ModelParams grads = model.params().zeros_like();
  model.loss_and_gradient(ex, 1.0, &grads);
  const auto loss = [&] { return model.loss_and_gradient(ex, 1.0, nullptr).total; };
  const auto values = model.params().tensors();
  const auto g = static_cast<const ModelParams&>(grads).tensors();
  return grad_check(loss, values, g);
}

}  // namespace mmslu::support
