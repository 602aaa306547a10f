#include "nerkit/encoders/transformer.hpp"

#include <cmath>
#include <numeric>

#include "nerkit/autodiff/init.hpp"
#include "nerkit/error.hpp"
#include "nerkit/log.hpp"

namespace nerkit::enc {

void ToyTransformerConfig::validate() const {
  if (num_layers == 0) throw ConfigError("transformer needs at least one layer");
  if (num_heads == 0 || hidden_units == 0 || ff_units == 0 || max_len == 0)
    throw ConfigError("transformer dimensions must be positive");
  if (hidden_units % num_heads != 0)
    throw ConfigError("hidden_units (" + std::to_string(hidden_units) + ") must be divisible by num_heads (" +
                      std::to_string(num_heads) + ")");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout must be in [0, 1)");
}

TransformerParams TransformerParams::init(const ToyTransformerConfig& config, std::size_t vocab_size, Rng& rng) {
  config.validate();
  if (vocab_size == 0) throw ConfigError("transformer vocabulary is empty");
  const std::size_t h = config.hidden_units, f = config.ff_units;
  TransformerParams p;
  p.config = config;
  p.piece_embedding = ad::uniform({vocab_size, h}, 0.1, rng);
  p.position_embedding = ad::uniform({config.max_len, h}, 0.1, rng);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    TransformerLayerParams L;
    L.query_w = ad::xavier_uniform(h, h, rng);
    L.key_w = ad::xavier_uniform(h, h, rng);
    L.value_w = ad::xavier_uniform(h, h, rng);
    L.out_w = ad::xavier_uniform(h, h, rng);
    L.ff1_w = ad::xavier_uniform(f, h, rng);
    L.ff2_w = ad::xavier_uniform(h, f, rng);
    for (ad::Tensor* b : {&L.query_b, &L.key_b, &L.value_b, &L.out_b, &L.norm1_shift, &L.norm2_shift, &L.ff2_b})
      *b = ad::Tensor::zeros({h}, true);
    L.ff1_b = ad::Tensor::zeros({f}, true);
    L.norm1_gain = ad::Tensor::full({h}, 1.0, true);
    L.norm2_gain = ad::Tensor::full({h}, 1.0, true);
    p.layers.push_back(std::move(L));
  }
  return p;
}

std::vector<ad::NamedTensor> TransformerParams::named(const std::string& prefix) const {
  std::vector<ad::NamedTensor> out{{prefix + ".piece_embedding", piece_embedding},
                                   {prefix + ".position_embedding", position_embedding}};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const std::string p = prefix + ".layer" + std::to_string(l);
    out.insert(out.end(), {{p + ".query_w", L.query_w},   {p + ".query_b", L.query_b},
                           {p + ".key_w", L.key_w},       {p + ".key_b", L.key_b},
                           {p + ".value_w", L.value_w},   {p + ".value_b", L.value_b},
                           {p + ".out_w", L.out_w},       {p + ".out_b", L.out_b},
                           {p + ".norm1_gain", L.norm1_gain}, {p + ".norm1_shift", L.norm1_shift},
                           {p + ".ff1_w", L.ff1_w},       {p + ".ff1_b", L.ff1_b},
                           {p + ".ff2_w", L.ff2_w},       {p + ".ff2_b", L.ff2_b},
                           {p + ".norm2_gain", L.norm2_gain}, {p + ".norm2_shift", L.norm2_shift}});
  }
  return out;
}

ad::Tensor scaled_dot_attention(ad::Graph& g, const ad::Tensor& query, const ad::Tensor& key,
                                const ad::Tensor& value, ad::Tensor* weights) {
  const double d = static_cast<double>(query.dim(1));
  ad::Tensor scores = g.scale(g.matmul(query, g.transpose(key)), 1.0 / std::sqrt(d));
  ad::Tensor w = g.softmax(scores);
  if (weights) *weights = w;
  return g.matmul(w, value);
}

TransformerOutput transformer_encode(ad::Graph& g, const TransformerParams& params,
                                     std::span<const std::size_t> piece_ids, bool training, Rng& rng) {
  const auto& cfg = params.config;
  if (piece_ids.empty()) throw ShapeError("transformer input is empty");
  TransformerOutput out;
  std::size_t n = piece_ids.size();
  if (n > cfg.max_len) {
    warn("input of " + std::to_string(n) + " pieces truncated to max_len " + std::to_string(cfg.max_len));
    n = cfg.max_len;
    out.truncated = true;
  }
  std::vector<std::size_t> ids(piece_ids.begin(), piece_ids.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});

  ad::Tensor x = g.add(g.gather_rows(params.piece_embedding, ids), g.gather_rows(params.position_embedding, positions));
  x = g.dropout(x, cfg.dropout_p, training, rng);

  const std::size_t head_dim = cfg.hidden_units / cfg.num_heads;
  for (const auto& L : params.layers) {
    ad::Tensor q = g.linear(x, L.query_w, L.query_b);
    ad::Tensor k = g.linear(x, L.key_w, L.key_b);
    ad::Tensor v = g.linear(x, L.value_w, L.value_b);
    std::vector<ad::Tensor> heads;
    std::vector<ad::Tensor> weights;
    for (std::size_t h = 0; h < cfg.num_heads; ++h) {
      const std::size_t b = h * head_dim, e = b + head_dim;
      ad::Tensor w;
      heads.push_back(scaled_dot_attention(g, g.slice(q, 1, b, e), g.slice(k, 1, b, e), g.slice(v, 1, b, e), &w));
      weights.push_back(w);
    }
    ad::Tensor attended = g.linear(g.concat(heads, 1), L.out_w, L.out_b);
    attended = g.dropout(attended, cfg.dropout_p, training, rng);
    x = g.layer_norm(g.add(x, attended), L.norm1_gain, L.norm1_shift);
    ad::Tensor ff = g.linear(g.gelu(g.linear(x, L.ff1_w, L.ff1_b)), L.ff2_w, L.ff2_b);
    ff = g.dropout(ff, cfg.dropout_p, training, rng);
    x = g.layer_norm(g.add(x, ff), L.norm2_gain, L.norm2_shift);
    out.attention.push_back(std::move(weights));
  }
  out.hidden = x;
  return out;
}

}  // namespace nerkit::enc
