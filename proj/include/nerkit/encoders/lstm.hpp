#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nerkit/autodiff/graph.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::enc {

// One LSTM cell. Input-side weights are {hidden, input}, recurrent weights
// {hidden, hidden}; every gate has an input-side and a recurrent bias.
struct LSTMCellParams {
  ad::Tensor W_ii, W_hi, W_if, W_hf, W_ig, W_hg, W_io, W_ho;
  ad::Tensor b_ii, b_hi, b_if, b_hf, b_ig, b_hg, b_io, b_ho;

  // Xavier-uniform weights, zero biases except the forget gate (1.0).
  static LSTMCellParams init(std::size_t input, std::size_t hidden, Rng& rng);
  static LSTMCellParams zeros(std::size_t input, std::size_t hidden);

  std::size_t input_dim() const { return W_ii.dim(1); }
  std::size_t hidden_dim() const { return W_ii.dim(0); }
  std::vector<ad::NamedTensor> named(const std::string& prefix) const;
};

struct LSTMState {
  ad::Tensor h;
  ad::Tensor c;
};

//   i = sigmoid(W_ii x + b_ii + W_hi h + b_hi)
//   f = sigmoid(W_if x + b_if + W_hf h + b_hf)
//   g = tanh(W_ig x + b_ig + W_hg h + b_hg)
//   o = sigmoid(W_io x + b_io + W_ho h + b_ho)
//   c' = f * c + i * g,  h' = o * tanh(c')
LSTMState lstm_step(ad::Graph& g, const LSTMCellParams& p, const ad::Tensor& x, const ad::Tensor& h_prev,
                    const ad::Tensor& c_prev);

struct BiLSTMParams {
  LSTMCellParams fwd;
  LSTMCellParams bwd;

  static BiLSTMParams init(std::size_t input, std::size_t hidden, Rng& rng);
  std::size_t output_dim() const { return fwd.hidden_dim() + bwd.hidden_dim(); }
  std::vector<ad::NamedTensor> named(const std::string& prefix) const;
};

// Output t is concat(forward h_t, backward h_t); one output per input.
std::vector<ad::Tensor> bilstm_encode(ad::Graph& g, const BiLSTMParams& p, std::span<const ad::Tensor> xs);

// concat(forward state after the last input, backward state after the first).
ad::Tensor bilstm_final(ad::Graph& g, const BiLSTMParams& p, std::span<const ad::Tensor> xs);

}  // namespace nerkit::enc
