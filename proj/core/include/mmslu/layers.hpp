#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmslu/matrix.hpp"

namespace mmslu {

class Rng;

/// Affine layer y = W x + b. The bias is stored as an (out x 1) matrix so
/// that every trainable tensor has the same type.
struct Dense {
  Matrix weight;
  Matrix bias;

  Dense() = default;
  /// Glorot-uniform weights, zero bias.
  Dense(std::size_t input_dim, std::size_t output_dim, Rng& rng);

  std::size_t input_dim() const { return weight.cols(); }
  std::size_t output_dim() const { return weight.rows(); }

  Vector forward(std::span<const double> x) const;
  /// Accumulates dW, db into `grad` and W^T dy into `dx` (which may be empty
  /// when the input gradient is not needed).
  void backward(std::span<const double> x, std::span<const double> dy, Dense& grad,
                std::span<double> dx) const;

  Dense zeros_like() const;
  void collect(std::vector<Matrix*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
  void collect(std::vector<const Matrix*>& out) const {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

/// Numerically stable softmax (max-subtracted).
Vector softmax(std::span<const double> logits);

inline constexpr double kProbabilityFloor = 1e-12;

/// -ln(max(probs[gold], 1e-12)).
double cross_entropy(std::span<const double> probs, std::size_t gold);

/// d(cross_entropy(softmax(z)))/dz = probs - onehot(gold).
Vector softmax_cross_entropy_grad(std::span<const double> probs, std::size_t gold);

std::size_t argmax(std::span<const double> values);

double sigmoid(double x);

}  // namespace mmslu
