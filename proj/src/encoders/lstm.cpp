#include "nerkit/encoders/lstm.hpp"

#include "nerkit/autodiff/init.hpp"
#include "nerkit/error.hpp"

namespace nerkit::enc {

namespace {
constexpr double kForgetBias = 1.0;
}

LSTMCellParams LSTMCellParams::init(std::size_t input, std::size_t hidden, Rng& rng) {
  if (input == 0 || hidden == 0) throw ConfigError("LSTM dimensions must be positive");
  LSTMCellParams p;
  for (ad::Tensor* w : {&p.W_ii, &p.W_if, &p.W_ig, &p.W_io}) *w = ad::xavier_uniform(hidden, input, rng);
  for (ad::Tensor* w : {&p.W_hi, &p.W_hf, &p.W_hg, &p.W_ho}) *w = ad::xavier_uniform(hidden, hidden, rng);
  for (ad::Tensor* b : {&p.b_ii, &p.b_hi, &p.b_hf, &p.b_ig, &p.b_hg, &p.b_io, &p.b_ho})
    *b = ad::Tensor::zeros({hidden}, true);
  p.b_if = ad::Tensor::full({hidden}, kForgetBias, true);
  return p;
}

LSTMCellParams LSTMCellParams::zeros(std::size_t input, std::size_t hidden) {
  LSTMCellParams p;
  for (ad::Tensor* w : {&p.W_ii, &p.W_if, &p.W_ig, &p.W_io}) *w = ad::Tensor::zeros({hidden, input}, true);
  for (ad::Tensor* w : {&p.W_hi, &p.W_hf, &p.W_hg, &p.W_ho}) *w = ad::Tensor::zeros({hidden, hidden}, true);
  for (ad::Tensor* b : {&p.b_ii, &p.b_hi, &p.b_if, &p.b_hf, &p.b_ig, &p.b_hg, &p.b_io, &p.b_ho})
    *b = ad::Tensor::zeros({hidden}, true);
  return p;
}

std::vector<ad::NamedTensor> LSTMCellParams::named(const std::string& prefix) const {
  return {{prefix + ".W_ii", W_ii}, {prefix + ".W_hi", W_hi}, {prefix + ".W_if", W_if}, {prefix + ".W_hf", W_hf},
          {prefix + ".W_ig", W_ig}, {prefix + ".W_hg", W_hg}, {prefix + ".W_io", W_io}, {prefix + ".W_ho", W_ho},
          {prefix + ".b_ii", b_ii}, {prefix + ".b_hi", b_hi}, {prefix + ".b_if", b_if}, {prefix + ".b_hf", b_hf},
          {prefix + ".b_ig", b_ig}, {prefix + ".b_hg", b_hg}, {prefix + ".b_io", b_io}, {prefix + ".b_ho", b_ho}};
}

LSTMState lstm_step(ad::Graph& g, const LSTMCellParams& p, const ad::Tensor& x, const ad::Tensor& h_prev,
                    const ad::Tensor& c_prev) {
  if (x.rank() != 1 || x.dim(0) != p.input_dim())
    throw ShapeError("lstm input " + ad::shape_string(x.shape()) + " does not match input size " +
                     std::to_string(p.input_dim()));
  auto gate = [&](const ad::Tensor& wx, const ad::Tensor& bx, const ad::Tensor& wh, const ad::Tensor& bh) {
    return g.add(g.linear(x, wx, bx), g.linear(h_prev, wh, bh));
  };
  ad::Tensor i = g.sigmoid(gate(p.W_ii, p.b_ii, p.W_hi, p.b_hi));
  ad::Tensor f = g.sigmoid(gate(p.W_if, p.b_if, p.W_hf, p.b_hf));
  ad::Tensor cand = g.tanh(gate(p.W_ig, p.b_ig, p.W_hg, p.b_hg));
  ad::Tensor o = g.sigmoid(gate(p.W_io, p.b_io, p.W_ho, p.b_ho));
  ad::Tensor c = g.add(g.mul(f, c_prev), g.mul(i, cand));
  ad::Tensor h = g.mul(o, g.tanh(c));
  return {h, c};
}

BiLSTMParams BiLSTMParams::init(std::size_t input, std::size_t hidden, Rng& rng) {
  BiLSTMParams p;
  p.fwd = LSTMCellParams::init(input, hidden, rng);
  p.bwd = LSTMCellParams::init(input, hidden, rng);
  return p;
}

std::vector<ad::NamedTensor> BiLSTMParams::named(const std::string& prefix) const {
  auto out = fwd.named(prefix + ".fwd");
  auto back = bwd.named(prefix + ".bwd");
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

namespace {

std::vector<ad::Tensor> run(ad::Graph& g, const LSTMCellParams& p, std::span<const ad::Tensor> xs, bool reverse) {
  const std::size_t n = xs.size();
  std::vector<ad::Tensor> hs(n);
  LSTMState s{ad::Tensor::zeros({p.hidden_dim()}), ad::Tensor::zeros({p.hidden_dim()})};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    s = lstm_step(g, p, xs[t], s.h, s.c);
    hs[t] = s.h;
  }
  return hs;
}

}  // namespace

std::vector<ad::Tensor> bilstm_encode(ad::Graph& g, const BiLSTMParams& p, std::span<const ad::Tensor> xs) {
  if (xs.empty()) throw UsageError("bilstm_encode needs at least one input");
  auto f = run(g, p.fwd, xs, false);
  auto b = run(g, p.bwd, xs, true);
  std::vector<ad::Tensor> out;
  out.reserve(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) out.push_back(g.concat({f[t], b[t]}));
  return out;
}

ad::Tensor bilstm_final(ad::Graph& g, const BiLSTMParams& p, std::span<const ad::Tensor> xs) {
  if (xs.empty()) throw UsageError("bilstm_final needs at least one input");
  auto f = run(g, p.fwd, xs, false);
  auto b = run(g, p.bwd, xs, true);
  return g.concat({f.back(), b.front()});
}

}  // namespace nerkit::enc
