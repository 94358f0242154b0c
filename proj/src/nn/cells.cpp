#include "nestner/nn/cells.hpp"

#include <cassert>

namespace nestner::nn {

LstmParams add_lstm(Parameters& params, const std::string& prefix, Index input_dim,
                    Index hidden_dim, Rng& rng) {
  Matrix w(4 * hidden_dim, input_dim + hidden_dim);
  init_uniform_fan_in(w, input_dim + hidden_dim, rng);
  Matrix b = Matrix::Zero(4 * hidden_dim, 1);
  b.block(hidden_dim, 0, hidden_dim, 1).setOnes();
  LstmParams p;
  p.weight = params.add(prefix + ".W", std::move(w));
  p.bias = params.add(prefix + ".b", std::move(b));
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  return p;
}

LstmParams find_lstm(const Parameters& params, const std::string& prefix) {
  LstmParams p;
  p.weight = params.id(prefix + ".W");
  p.bias = params.id(prefix + ".b");
  p.hidden_dim = params.value(p.weight).rows() / 4;
  p.input_dim = params.value(p.weight).cols() - p.hidden_dim;
  return p;
}

GruParams add_gru(Parameters& params, const std::string& prefix, Index input_dim,
                  Index hidden_dim, Rng& rng) {
  Matrix w(3 * hidden_dim, input_dim);
  init_uniform_fan_in(w, input_dim, rng);
  Matrix u(3 * hidden_dim, hidden_dim);
  init_uniform_fan_in(u, hidden_dim, rng);
  GruParams p;
  p.input_weight = params.add(prefix + ".W", std::move(w));
  p.recurrent_weight = params.add(prefix + ".U", std::move(u));
  p.bias = params.add(prefix + ".b", Matrix::Zero(3 * hidden_dim, 1));
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  return p;
}

GruParams find_gru(const Parameters& params, const std::string& prefix) {
  GruParams p;
  p.input_weight = params.id(prefix + ".W");
  p.recurrent_weight = params.id(prefix + ".U");
  p.bias = params.id(prefix + ".b");
  p.hidden_dim = params.value(p.recurrent_weight).cols();
  p.input_dim = params.value(p.input_weight).cols();
  return p;
}

LstmState lstm_zero_state(Graph& g, const LstmParams& p) {
  Var zero = g.input(Matrix::Zero(p.hidden_dim, 1));
  return {zero, zero};
}

LstmState lstm_cell(Graph& g, const LstmParams& p, Var x, const LstmState& state) {
  const Index h = p.hidden_dim;
  Var gates = g.affine(g.param(p.weight), g.concat({x, state.h}), g.param(p.bias));
  Var input_gate = g.sigmoid(g.slice(gates, 0, h));
  Var forget_gate = g.sigmoid(g.slice(gates, h, h));
  Var output_gate = g.sigmoid(g.slice(gates, 2 * h, h));
  Var candidate = g.tanh(g.slice(gates, 3 * h, h));
  Var c = g.add(g.cmul(forget_gate, state.c), g.cmul(input_gate, candidate));
  Var out = g.cmul(output_gate, g.tanh(c));
  return {out, c};
}

Var gru_cell(Graph& g, const GruParams& p, Var x, Var h) {
  const Index n = p.hidden_dim;
  Var from_x = g.affine(g.param(p.input_weight), x, g.param(p.bias));
  Var from_h = g.matmul(g.param(p.recurrent_weight), h);
  Var update = g.sigmoid(g.add(g.slice(from_x, 0, n), g.slice(from_h, 0, n)));
  Var reset = g.sigmoid(g.add(g.slice(from_x, n, n), g.slice(from_h, n, n)));
  Var candidate = g.tanh(g.add(g.slice(from_x, 2 * n, n), g.cmul(reset, g.slice(from_h, 2 * n, n))));
  return g.add(g.cmul(g.one_minus(update), candidate), g.cmul(update, h));
}

BiLstmOutput bilstm(Graph& g, const BiLstmParams& p, std::span<const Var> inputs) {
  const std::size_t n = inputs.size();
  assert(n > 0);
  std::vector<Var> forward(n), backward(n);
  LstmState state = lstm_zero_state(g, p.forward);
  for (std::size_t t = 0; t < n; ++t) {
    state = lstm_cell(g, p.forward, inputs[t], state);
    forward[t] = state.h;
  }
  state = lstm_zero_state(g, p.backward);
  for (std::size_t t = n; t-- > 0;) {
    state = lstm_cell(g, p.backward, inputs[t], state);
    backward[t] = state.h;
  }
  BiLstmOutput out;
  out.outputs.reserve(n);
  for (std::size_t t = 0; t < n; ++t) out.outputs.push_back(g.concat({forward[t], backward[t]}));
  out.forward_final = forward[n - 1];
  out.backward_final = backward[0];
  return out;
}

Var bigru_final(Graph& g, const GruParams& forward, const GruParams& backward,
                std::span<const Var> inputs) {
  Var h_fw = g.input(Matrix::Zero(forward.hidden_dim, 1));
  for (Var x : inputs) h_fw = gru_cell(g, forward, x, h_fw);
  Var h_bw = g.input(Matrix::Zero(backward.hidden_dim, 1));
  for (auto it = inputs.rbegin(); it != inputs.rend(); ++it) h_bw = gru_cell(g, backward, *it, h_bw);
  return g.concat({h_fw, h_bw});
}

}  // namespace nestner::nn
