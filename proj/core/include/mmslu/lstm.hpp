#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmslu/matrix.hpp"

namespace mmslu {

class Rng;

/// Standard LSTM cell (input, forget, output gates and candidate g).
///   i = sigmoid(W_i x + U_i h + b_i)     f, o likewise
///   g = tanh(W_g x + U_g h + b_g)
///   c' = f * c + i * g,  h' = o * tanh(c')
struct LstmCellParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Matrix w_i, w_f, w_o, w_g;  // hidden x input
  Matrix u_i, u_f, u_o, u_g;  // hidden x hidden
  Matrix b_i, b_f, b_o, b_g;  // hidden x 1

  LstmCellParams() = default;
  /// All-zero parameters of the given shape.
  LstmCellParams(std::size_t input_dim, std::size_t hidden_dim);
  /// Glorot-uniform weights, zero biases except forget-gate bias = 1.
  static LstmCellParams initialized(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

  LstmCellParams zeros_like() const { return {input_dim, hidden_dim}; }
  std::size_t parameter_count() const;
  void collect(std::vector<Matrix*>& out);
  void collect(std::vector<const Matrix*>& out) const;
};

/// Everything a single step needs to be differentiated later.
struct LstmStep {
  Vector x, h_prev, c_prev;
  Vector i, f, o, g;
  Vector c, tanh_c, h;
};

LstmStep lstm_step(const LstmCellParams& p, std::span<const double> x,
                   std::span<const double> h_prev, std::span<const double> c_prev);

/// Backpropagates dh (gradient w.r.t. h') and dc (gradient flowing into c'
/// from the next step). Parameter gradients accumulate into `grad`; input and
/// previous-state gradients are written to dx, dh_prev, dc_prev.
void lstm_step_backward(const LstmCellParams& p, const LstmStep& step, std::span<const double> dh,
                        std::span<const double> dc, LstmCellParams& grad, Vector& dx,
                        Vector& dh_prev, Vector& dc_prev);

struct BiLstm {
  LstmCellParams forward;
  LstmCellParams backward;

  BiLstm() = default;
  BiLstm(LstmCellParams fwd, LstmCellParams bwd) : forward(std::move(fwd)), backward(std::move(bwd)) {}
  static BiLstm initialized(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

  std::size_t input_dim() const { return forward.input_dim; }
  std::size_t hidden_dim() const { return forward.hidden_dim; }
  BiLstm zeros_like() const { return {forward.zeros_like(), backward.zeros_like()}; }
  std::size_t parameter_count() const {
    return forward.parameter_count() + backward.parameter_count();
  }
  void collect(std::vector<Matrix*>& out) {
    forward.collect(out);
    backward.collect(out);
  }
  void collect(std::vector<const Matrix*>& out) const {
    forward.collect(out);
    backward.collect(out);
  }
};

/// Forward pass with every step retained for backpropagation.
/// forward_steps[t] processed input t; backward_steps[t] processed input t
/// as well (the backward cell runs from the last position to the first).
struct BiLstmTrace {
  std::vector<LstmStep> forward_steps;
  std::vector<LstmStep> backward_steps;
  std::vector<Vector> outputs;  // outputs[t] = [h_t ; h'_t], length 2H
};

BiLstmTrace bilstm_trace(const BiLstm& net, const std::vector<Vector>& inputs);

std::vector<Vector> bilstm_forward(const std::vector<Vector>& inputs, const LstmCellParams& fwd,
                                   const LstmCellParams& bwd);

/// Returns gradients w.r.t. the inputs; parameter gradients accumulate into `grad`.
std::vector<Vector> bilstm_backward(const BiLstm& net, const BiLstmTrace& trace,
                                    const std::vector<Vector>& d_outputs, BiLstm& grad);

}  // namespace mmslu
