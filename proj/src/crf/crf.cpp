#include "nerkit/crf/crf.hpp"

#include <cmath>
#include <limits>

#include "nerkit/autodiff/init.hpp"
#include "nerkit/error.hpp"

namespace nerkit::crf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_labels(const ad::Tensor& scores, std::span<const std::size_t> labels) {
  if (scores.dim(0) != labels.size()) {
    throw UsageError("sequence has " + std::to_string(scores.dim(0)) + " positions but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (std::size_t l : labels) {
    if (l >= scores.dim(1)) throw IndexError("label id " + std::to_string(l) + " out of range");
  }
}

void require_nonempty(const ad::Tensor& scores) {
  if (scores.rank() != 2 || scores.dim(1) == 0) {
    throw ShapeError("expected {n, T} scores, got " + ad::shape_string(scores.shape()));
  }
}

ad::Tensor stack_hidden(ad::Graph& g, std::span<const ad::Tensor> hs) {
  if (hs.empty()) throw UsageError("empty sequence");
  return g.stack(hs);
}

}  // namespace

CRFParams CRFParams::zeros(std::size_t num_labels, std::size_t hidden) {
  return {ad::Tensor::zeros({num_labels, hidden}, true), ad::Tensor::zeros({num_labels + 1, num_labels + 1}, true),
          {}};
}

CRFParams CRFParams::random(std::size_t num_labels, std::size_t hidden, Rng& rng) {
  return {ad::xavier_uniform(num_labels, hidden, rng), ad::Tensor::zeros({num_labels + 1, num_labels + 1}, true), {}};
}

void CRFParams::mask_illegal(const TagSet& tags) {
  const std::size_t t = num_labels();
  if (tags.size() != t) throw UsageError("tag set size does not match CRF label count");
  mask = ad::Tensor::zeros({t + 1, t + 1});
  for (std::size_t from = 0; from <= t; ++from)
    for (std::size_t to = 0; to < t; ++to)
      if (!tags.allowed(from, to)) mask[from * (t + 1) + to] = kNegInf;
}

ad::Tensor CRFParams::effective_transition(ad::Graph& g) const {
  return mask.defined() ? g.add(transition, mask) : transition;
}

ad::Tensor emissions(ad::Graph& g, const CRFParams& p, const ad::Tensor& hidden) {
  return g.linear(hidden, p.emission);
}

ad::Tensor score_emissions(ad::Graph& g, const CRFParams& p, const ad::Tensor& scores,
                           std::span<const std::size_t> labels) {
  require_nonempty(scores);
  require_labels(scores, labels);
  const std::size_t t = p.num_labels(), width = t + 1, bound = p.boundary();
  std::vector<std::size_t> emit, trans;
  std::size_t prev = bound;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    emit.push_back(i * t + labels[i]);
    trans.push_back(prev * width + labels[i]);
    prev = labels[i];
  }
  trans.push_back(prev * width + bound);
  ad::Tensor table = p.effective_transition(g);
  return g.add(g.sum(g.pick(scores, emit)), g.sum(g.pick(table, trans)));
}

ad::Tensor log_partition_emissions(ad::Graph& g, const CRFParams& p, const ad::Tensor& scores) {
  require_nonempty(scores);
  const std::size_t t = p.num_labels(), n = scores.dim(0);
  if (scores.dim(1) != t) throw ShapeError("emission scores do not match the CRF label count");
  ad::Tensor table = p.effective_transition(g);
  ad::Tensor inner = g.slice(g.slice(table, 0, 0, t), 1, 0, t);         // {T, T}
  ad::Tensor start = g.row(g.slice(table, 1, 0, t), t);                 // {T}
  ad::Tensor end = g.slice(g.row(g.transpose(table), t), 0, 0, t);      // {T}
  // alpha[j] = log-sum over prefixes ending in tag j.
  ad::Tensor alpha = g.add(start, g.row(scores, 0));
  for (std::size_t i = 1; i < n; ++i) {
    ad::Tensor paths = g.add_broadcast(inner, alpha, 0);  // paths[a][b] = alpha[a] + trans[a][b]
    alpha = g.add(g.log_sum_exp(paths, 0), g.row(scores, i));
  }
  return g.log_sum_exp(g.add(alpha, end));
}

ad::Tensor score_sequence(ad::Graph& g, const CRFParams& p, const ad::Tensor& hidden,
                          std::span<const std::size_t> labels) {
  return score_emissions(g, p, emissions(g, p, hidden), labels);
}

ad::Tensor score_sequence(ad::Graph& g, const CRFParams& p, std::span<const ad::Tensor> hs,
                          std::span<const std::size_t> labels) {
  return score_sequence(g, p, stack_hidden(g, hs), labels);
}

ad::Tensor log_partition(ad::Graph& g, const CRFParams& p, const ad::Tensor& hidden) {
  return log_partition_emissions(g, p, emissions(g, p, hidden));
}

ad::Tensor log_partition(ad::Graph& g, const CRFParams& p, std::span<const ad::Tensor> hs) {
  return log_partition(g, p, stack_hidden(g, hs));
}

ad::Tensor log_prob(ad::Graph& g, const CRFParams& p, const ad::Tensor& hidden, std::span<const std::size_t> labels) {
  ad::Tensor scores = emissions(g, p, hidden);
  return g.sub(score_emissions(g, p, scores, labels), log_partition_emissions(g, p, scores));
}

ad::Tensor log_prob(ad::Graph& g, const CRFParams& p, std::span<const ad::Tensor> hs,
                    std::span<const std::size_t> labels) {
  return log_prob(g, p, stack_hidden(g, hs), labels);
}

Decoded viterbi_emissions(const CRFParams& p, const ad::Tensor& scores) {
  require_nonempty(scores);
  const std::size_t t = p.num_labels(), width = t + 1, n = scores.dim(0);
  if (scores.dim(1) != t) throw ShapeError("emission scores do not match the CRF label count");
  std::vector<double> trans(p.transition.values().begin(), p.transition.values().end());
  if (p.mask.defined())
    for (std::size_t i = 0; i < trans.size(); ++i) trans[i] += p.mask[i];

  std::vector<double> best(t), next(t);
  std::vector<std::size_t> back(n * t, 0);
  for (std::size_t j = 0; j < t; ++j) best[j] = trans[t * width + j] + scores.at(0, j);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      double top = kNegInf;
      std::size_t arg = 0;
      for (std::size_t k = 0; k < t; ++k) {
        const double cand = best[k] + trans[k * width + j];
        if (cand > top) {
          top = cand;
          arg = k;
        }
      }
      next[j] = top + scores.at(i, j);
      back[i * t + j] = arg;
    }
    best.swap(next);
  }
  Decoded out;
  out.score = kNegInf;
  std::size_t last = 0;
  for (std::size_t j = 0; j < t; ++j) {
    const double cand = best[j] + trans[j * width + t];
    if (cand > out.score) {
      out.score = cand;
      last = j;
    }
  }
  out.labels.assign(n, 0);
  out.labels[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) out.labels[i - 1] = back[i * t + out.labels[i]];
  return out;
}

Decoded viterbi_decode(const CRFParams& p, const ad::Tensor& hidden) {
  ad::Graph g(false);
  return viterbi_emissions(p, emissions(g, p, hidden));
}

Decoded viterbi_decode(const CRFParams& p, std::span<const ad::Tensor> hs) {
  ad::Graph g(false);
  return viterbi_emissions(p, emissions(g, p, stack_hidden(g, hs)));
}

ad::Tensor l2_penalty(ad::Graph& g, double lambda, std::span<const ad::Tensor> theta) {
  if (lambda < 0.0) throw ConfigError("L2 coefficient must be non-negative");
  ad::Tensor total = ad::Tensor::scalar(0.0);
  for (const auto& t : theta) total = g.add(total, g.sum_squares(t));
  return g.scale(total, lambda / 2.0);
}

ad::Tensor nll_loss(ad::Graph& g, const CRFParams& p, std::span<const Example> batch, double lambda,
                    std::span<const ad::Tensor> theta) {
  if (batch.empty()) throw UsageError("nll_loss: empty batch");
  ad::Tensor data = ad::Tensor::scalar(0.0);
  for (const auto& ex : batch) data = g.sub(data, log_prob(g, p, ex.hidden, ex.labels));
  if (lambda == 0.0 || theta.empty()) return data;
  return g.add(data, l2_penalty(g, lambda, theta));
}

LinearHead LinearHead::zeros(std::size_t num_labels, std::size_t hidden) {
  return {ad::Tensor::zeros({num_labels, hidden}, true), ad::Tensor::zeros({num_labels}, true)};
}

LinearHead LinearHead::random(std::size_t num_labels, std::size_t hidden, Rng& rng) {
  return {ad::xavier_uniform(num_labels, hidden, rng), ad::Tensor::zeros({num_labels}, true)};
}

ad::Tensor linear_log_probs(ad::Graph& g, const LinearHead& head, const ad::Tensor& hidden) {
  ad::Tensor logits = g.linear(hidden, head.weight, head.bias);
  return g.add_broadcast(logits, g.scale(g.log_sum_exp(logits, 1), -1.0), 0);
}

ad::Tensor linear_loss(ad::Graph& g, const LinearHead& head, const ad::Tensor& hidden,
                       std::span<const std::size_t> labels) {
  if (hidden.dim(0) != labels.size()) {
    throw UsageError("sequence has " + std::to_string(hidden.dim(0)) + " positions but " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t t = head.num_labels();
  std::vector<std::size_t> picks;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kPadLabel) continue;
    if (labels[i] >= t) throw IndexError("label id " + std::to_string(labels[i]) + " out of range");
    picks.push_back(i * t + labels[i]);
  }
  if (picks.empty()) return ad::Tensor::scalar(0.0);
  return g.scale(g.sum(g.pick(linear_log_probs(g, head, hidden), picks)), -1.0);
}

std::vector<std::size_t> linear_decode(const LinearHead& head, const ad::Tensor& hidden) {
  ad::Graph g(false);
  ad::Tensor logits = g.linear(hidden, head.weight, head.bias);
  const std::size_t n = logits.dim(0), t = logits.dim(1);
  std::vector<std::size_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j < t; ++j)
      if (logits.at(i, j) > logits.at(i, out[i])) out[i] = j;
  return out;
}

}  // namespace nerkit::crf
