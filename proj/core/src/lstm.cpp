#include "mmslu/lstm.hpp"

#include <cmath>
#include <string>

#include "mmslu/error.hpp"
#include "mmslu/layers.hpp"
#include "mmslu/random.hpp"

namespace mmslu {

LstmCellParams::LstmCellParams(std::size_t in, std::size_t hidden)
    : input_dim(in),
      hidden_dim(hidden),
      w_i(hidden, in), w_f(hidden, in), w_o(hidden, in), w_g(hidden, in),
      u_i(hidden, hidden), u_f(hidden, hidden), u_o(hidden, hidden), u_g(hidden, hidden),
      b_i(hidden, 1), b_f(hidden, 1), b_o(hidden, 1), b_g(hidden, 1) {}

LstmCellParams LstmCellParams::initialized(std::size_t in, std::size_t hidden, Rng& rng) {
  LstmCellParams p(in, hidden);
  p.w_i = glorot_init(hidden, in, rng);
  p.w_f = glorot_init(hidden, in, rng);
  p.w_o = glorot_init(hidden, in, rng);
  p.w_g = glorot_init(hidden, in, rng);
  p.u_i = glorot_init(hidden, hidden, rng);
  p.u_f = glorot_init(hidden, hidden, rng);
  p.u_o = glorot_init(hidden, hidden, rng);
  p.u_g = glorot_init(hidden, hidden, rng);
  p.b_f.fill(1.0);
  return p;
}

std::size_t LstmCellParams::parameter_count() const {
  return 4 * hidden_dim * input_dim + 4 * hidden_dim * hidden_dim + 4 * hidden_dim;
}

void LstmCellParams::collect(std::vector<Matrix*>& out) {
  for (Matrix* m : {&w_i, &w_f, &w_o, &w_g, &u_i, &u_f, &u_o, &u_g, &b_i, &b_f, &b_o, &b_g}) {
    out.push_back(m);
  }
}

void LstmCellParams::collect(std::vector<const Matrix*>& out) const {
  for (const Matrix* m : {&w_i, &w_f, &w_o, &w_g, &u_i, &u_f, &u_o, &u_g, &b_i, &b_f, &b_o, &b_g}) {
    out.push_back(m);
  }
}

namespace {

Vector gate_preactivation(const Matrix& w, const Matrix& u, const Matrix& b,
                          std::span<const double> x, std::span<const double> h) {
  Vector a(b.values().begin(), b.values().end());
  gemv_accumulate(w, x, a);
  gemv_accumulate(u, h, a);
  return a;
}

void check_step_shapes(const LstmCellParams& p, std::size_t x, std::size_t h, std::size_t c) {
  if (x != p.input_dim || h != p.hidden_dim || c != p.hidden_dim) {
    throw ShapeError("lstm step: cell expects input " + std::to_string(p.input_dim) +
                     ", hidden " + std::to_string(p.hidden_dim) + "; got x[" + std::to_string(x) +
                     "], h[" + std::to_string(h) + "], c[" + std::to_string(c) + "]");
  }
}

}  // namespace

LstmStep lstm_step(const LstmCellParams& p, std::span<const double> x,
                   std::span<const double> h_prev, std::span<const double> c_prev) {
  check_step_shapes(p, x.size(), h_prev.size(), c_prev.size());
  LstmStep s;
  s.x.assign(x.begin(), x.end());
  s.h_prev.assign(h_prev.begin(), h_prev.end());
  s.c_prev.assign(c_prev.begin(), c_prev.end());
  s.i = gate_preactivation(p.w_i, p.u_i, p.b_i, x, h_prev);
  s.f = gate_preactivation(p.w_f, p.u_f, p.b_f, x, h_prev);
  s.o = gate_preactivation(p.w_o, p.u_o, p.b_o, x, h_prev);
  s.g = gate_preactivation(p.w_g, p.u_g, p.b_g, x, h_prev);
  const std::size_t H = p.hidden_dim;
  s.c.resize(H);
  s.tanh_c.resize(H);
  s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.i[k] = sigmoid(s.i[k]);
    s.f[k] = sigmoid(s.f[k]);
    s.o[k] = sigmoid(s.o[k]);
    s.g[k] = std::tanh(s.g[k]);
    s.c[k] = s.f[k] * c_prev[k] + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
  return s;
}

void lstm_step_backward(const LstmCellParams& p, const LstmStep& s, std::span<const double> dh,
                        std::span<const double> dc, LstmCellParams& grad, Vector& dx,
                        Vector& dh_prev, Vector& dc_prev) {
  const std::size_t H = p.hidden_dim;
  if (dh.size() != H || dc.size() != H) {
    throw ShapeError("lstm step backward: state gradients must have " + std::to_string(H) +
                     " entries");
  }
  Vector da_i(H), da_f(H), da_o(H), da_g(H);
  dc_prev.assign(H, 0.0);
  for (std::size_t k = 0; k < H; ++k) {
    const double dc_total = dc[k] + dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
    const double d_o = dh[k] * s.tanh_c[k];
    const double d_i = dc_total * s.g[k];
    const double d_g = dc_total * s.i[k];
    const double d_f = dc_total * s.c_prev[k];
    dc_prev[k] = dc_total * s.f[k];
    da_i[k] = d_i * s.i[k] * (1.0 - s.i[k]);
    da_f[k] = d_f * s.f[k] * (1.0 - s.f[k]);
    da_o[k] = d_o * s.o[k] * (1.0 - s.o[k]);
    da_g[k] = d_g * (1.0 - s.g[k] * s.g[k]);
  }

  dx.assign(p.input_dim, 0.0);
  dh_prev.assign(H, 0.0);
  struct Gate {
    const Matrix& w;
    const Matrix& u;
    Matrix& dw;
    Matrix& du;
    Matrix& db;
    const Vector& da;
  };
  const Gate gates[] = {
      {p.w_i, p.u_i, grad.w_i, grad.u_i, grad.b_i, da_i},
      {p.w_f, p.u_f, grad.w_f, grad.u_f, grad.b_f, da_f},
      {p.w_o, p.u_o, grad.w_o, grad.u_o, grad.b_o, da_o},
      {p.w_g, p.u_g, grad.w_g, grad.u_g, grad.b_g, da_g},
  };
  for (const Gate& gate : gates) {
    outer_accumulate(gate.dw, gate.da, s.x);
    outer_accumulate(gate.du, gate.da, s.h_prev);
    auto db = gate.db.values();
    for (std::size_t k = 0; k < H; ++k) db[k] += gate.da[k];
    gemv_transpose_accumulate(gate.w, gate.da, dx);
    gemv_transpose_accumulate(gate.u, gate.da, dh_prev);
  }
}

BiLstm BiLstm::initialized(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  auto fwd = LstmCellParams::initialized(input_dim, hidden_dim, rng);
  auto bwd = LstmCellParams::initialized(input_dim, hidden_dim, rng);
  return {std::move(fwd), std::move(bwd)};
}

BiLstmTrace bilstm_trace(const BiLstm& net, const std::vector<Vector>& inputs) {
  if (inputs.empty()) throw EmptyInputError("bilstm: empty input sequence");
  const std::size_t D = net.input_dim();
  const std::size_t H = net.hidden_dim();
  if (net.backward.input_dim != D || net.backward.hidden_dim != H) {
    throw ShapeError("bilstm: forward and backward cells disagree on dimensions");
  }
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (inputs[t].size() != D) {
      throw ShapeError("bilstm: input " + std::to_string(t) + " has dim " +
                       std::to_string(inputs[t].size()) + ", expected " + std::to_string(D));
    }
  }
  const std::size_t n = inputs.size();
  BiLstmTrace trace;
  trace.forward_steps.reserve(n);
  trace.backward_steps.resize(n);
  Vector h(H, 0.0), c(H, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    trace.forward_steps.push_back(lstm_step(net.forward, inputs[t], h, c));
    h = trace.forward_steps.back().h;
    c = trace.forward_steps.back().c;
  }
  h.assign(H, 0.0);
  c.assign(H, 0.0);
  for (std::size_t t = n; t-- > 0;) {
    trace.backward_steps[t] = lstm_step(net.backward, inputs[t], h, c);
    h = trace.backward_steps[t].h;
    c = trace.backward_steps[t].c;
  }
  trace.outputs.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    Vector& out = trace.outputs[t];
    out.reserve(2 * H);
    out.insert(out.end(), trace.forward_steps[t].h.begin(), trace.forward_steps[t].h.end());
    out.insert(out.end(), trace.backward_steps[t].h.begin(), trace.backward_steps[t].h.end());
  }
  return trace;
}

std::vector<Vector> bilstm_forward(const std::vector<Vector>& inputs, const LstmCellParams& fwd,
                                   const LstmCellParams& bwd) {
  if (fwd.input_dim != bwd.input_dim || fwd.hidden_dim != bwd.hidden_dim) {
    throw ShapeError("bilstm: forward and backward cells disagree on dimensions");
  }
  BiLstm net(fwd, bwd);
  return bilstm_trace(net, inputs).outputs;
}

std::vector<Vector> bilstm_backward(const BiLstm& net, const BiLstmTrace& trace,
                                    const std::vector<Vector>& d_outputs, BiLstm& grad) {
  const std::size_t n = trace.outputs.size();
  const std::size_t H = net.hidden_dim();
  if (d_outputs.size() != n) {
    throw ShapeError("bilstm backward: expected " + std::to_string(n) + " output gradients, got " +
                     std::to_string(d_outputs.size()));
  }
  std::vector<Vector> d_inputs(n, Vector(net.input_dim(), 0.0));
  Vector dh_next(H, 0.0), dc_next(H, 0.0), dx, dh_prev, dc_prev;

  // Forward cell: gradients flow from the last position back to the first.
  for (std::size_t t = n; t-- > 0;) {
    if (d_outputs[t].size() != 2 * H) {
      throw ShapeError("bilstm backward: output gradient " + std::to_string(t) + " has dim " +
                       std::to_string(d_outputs[t].size()) + ", expected " +
                       std::to_string(2 * H));
    }
    Vector dh(H);
    for (std::size_t k = 0; k < H; ++k) dh[k] = d_outputs[t][k] + dh_next[k];
    lstm_step_backward(net.forward, trace.forward_steps[t], dh, dc_next, grad.forward, dx,
                       dh_prev, dc_prev);
    for (std::size_t k = 0; k < dx.size(); ++k) d_inputs[t][k] += dx[k];
    dh_next = dh_prev;
    dc_next = dc_prev;
  }

  // Backward cell ran from n-1 down to 0, so its gradients flow 0 -> n-1.
  dh_next.assign(H, 0.0);
  dc_next.assign(H, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    Vector dh(H);
    for (std::size_t k = 0; k < H; ++k) dh[k] = d_outputs[t][H + k] + dh_next[k];
    lstm_step_backward(net.backward, trace.backward_steps[t], dh, dc_next, grad.backward, dx,
                       dh_prev, dc_prev);
    for (std::size_t k = 0; k < dx.size(); ++k) d_inputs[t][k] += dx[k];
    dh_next = dh_prev;
    dc_next = dc_prev;
  }
  return d_inputs;
}

}  // namespace mmslu
