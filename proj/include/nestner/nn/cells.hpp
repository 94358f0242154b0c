#ifndef NESTNER_NN_CELLS_HPP
#define NESTNER_NN_CELLS_HPP

#include <span>
#include <string>
#include <vector>

#include "nestner/nn/graph.hpp"

namespace nestner::nn {

/// LSTM with fused gate weights over concat(x, h): rows are the input,
/// forget, output and candidate blocks, in that order.
struct LstmParams {
  ParamId weight;  // 4h x (in + h)
  ParamId bias;    // 4h x 1
  Index input_dim = 0;
  Index hidden_dim = 0;
};

/// GRU with update (z), reset (r) and candidate (n) blocks:
///   z = sigmoid(Wz x + Uz h + bz), r = sigmoid(Wr x + Ur h + br)
///   n = tanh(Wn x + bn + r * (Un h)),  h' = (1 - z) * n + z * h
struct GruParams {
  ParamId input_weight;      // 3h x in
  ParamId recurrent_weight;  // 3h x h
  ParamId bias;              // 3h x 1
  Index input_dim = 0;
  Index hidden_dim = 0;
};

/// Registers `<prefix>.W` and `<prefix>.b`; forget-gate bias starts at 1.
LstmParams add_lstm(Parameters& params, const std::string& prefix, Index input_dim,
                    Index hidden_dim, Rng& rng);
LstmParams find_lstm(const Parameters& params, const std::string& prefix);

GruParams add_gru(Parameters& params, const std::string& prefix, Index input_dim,
                  Index hidden_dim, Rng& rng);
GruParams find_gru(const Parameters& params, const std::string& prefix);

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_cell(Graph& g, const LstmParams& p, Var x, const LstmState& state);
Var gru_cell(Graph& g, const GruParams& p, Var x, Var h);

LstmState lstm_zero_state(Graph& g, const LstmParams& p);

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;
};

struct BiLstmOutput {
  std::vector<Var> outputs;  // concat(forward_t, backward_t)
  Var forward_final;
  Var backward_final;
};

BiLstmOutput bilstm(Graph& g, const BiLstmParams& p, std::span<const Var> inputs);

/// Final forward state over `inputs` concatenated with the final state of
/// the backward GRU run over the reversed sequence.
Var bigru_final(Graph& g, const GruParams& forward, const GruParams& backward,
                std::span<const Var> inputs);

}  // namespace nestner::nn

#endif  // NESTNER_NN_CELLS_HPP
