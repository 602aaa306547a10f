#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nerkit/autodiff/graph.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::enc {

struct ToyTransformerConfig {
  std::size_t num_layers = 2;
  std::size_t num_heads = 2;
  std::size_t hidden_units = 64;
  std::size_t ff_units = 128;
  std::size_t max_len = 512;
  double dropout_p = 0.1;

  void validate() const;
};

struct TransformerLayerParams {
  ad::Tensor query_w, query_b, key_w, key_b, value_w, value_b, out_w, out_b;
  ad::Tensor norm1_gain, norm1_shift;
  ad::Tensor ff1_w, ff1_b, ff2_w, ff2_b;
  ad::Tensor norm2_gain, norm2_shift;
};

struct TransformerParams {
  ToyTransformerConfig config;
  ad::Tensor piece_embedding;     // {V, hidden}
  ad::Tensor position_embedding;  // {max_len, hidden}
  std::vector<TransformerLayerParams> layers;

  static TransformerParams init(const ToyTransformerConfig& config, std::size_t vocab_size, Rng& rng);
  std::vector<ad::NamedTensor> named(const std::string& prefix) const;
};

struct TransformerOutput {
  ad::Tensor hidden;                                 // {n, hidden}
  std::vector<std::vector<ad::Tensor>> attention;    // [layer][head] -> {n, n}, rows sum to 1
  bool truncated = false;
};

// softmax(Q K^T / sqrt(d)) V for one head; the weights are written to
// `weights` when non-null.
ad::Tensor scaled_dot_attention(ad::Graph& g, const ad::Tensor& query, const ad::Tensor& key,
                                const ad::Tensor& value, ad::Tensor* weights = nullptr);

// Piece + position embeddings, then per layer: multi-head self-attention,
// residual + layer norm, GELU feedforward, residual + layer norm. Inputs
// longer than max_len are truncated with a warning.
TransformerOutput transformer_encode(ad::Graph& g, const TransformerParams& params,
                                     std::span<const std::size_t> piece_ids, bool training, Rng& rng);

}  // namespace nerkit::enc
