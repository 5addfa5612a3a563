#include "mmslu/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmslu/error.hpp"
#include "mmslu/random.hpp"

namespace mmslu {

Dense::Dense(std::size_t input_dim, std::size_t output_dim, Rng& rng)
    : weight(glorot_init(output_dim, input_dim, rng)), bias(output_dim, 1) {}

Vector Dense::forward(std::span<const double> x) const {
  Vector y(bias.values().begin(), bias.values().end());
  gemv_accumulate(weight, x, y);
  return y;
}

void Dense::backward(std::span<const double> x, std::span<const double> dy, Dense& grad,
                     std::span<double> dx) const {
  if (dy.size() != output_dim()) {
    throw ShapeError("dense backward: dy has " + std::to_string(dy.size()) + " entries, expected " +
                     std::to_string(output_dim()));
  }
  outer_accumulate(grad.weight, dy, x);
  auto db = grad.bias.values();
  for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i];
  if (!dx.empty()) gemv_transpose_accumulate(weight, dy, dx);
}

Dense Dense::zeros_like() const {
  Dense d;
  d.weight = Matrix(weight.rows(), weight.cols());
  d.bias = Matrix(bias.rows(), bias.cols());
  return d;
}

Vector softmax(std::span<const double> logits) {
  if (logits.empty()) throw EmptyInputError("softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double cross_entropy(std::span<const double> probs, std::size_t gold) {
  if (gold >= probs.size()) {
    throw IndexError("gold class " + std::to_string(gold) + " out of range for " +
                     std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs[gold], kProbabilityFloor));
}

Vector softmax_cross_entropy_grad(std::span<const double> probs, std::size_t gold) {
  if (gold >= probs.size()) {
    throw IndexError("gold class " + std::to_string(gold) + " out of range for " +
                     std::to_string(probs.size()) + " classes");
  }
  Vector grad(probs.begin(), probs.end());
  grad[gold] -= 1.0;
  return grad;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace mmslu
