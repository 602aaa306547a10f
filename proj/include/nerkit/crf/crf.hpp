#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nerkit/autodiff/graph.hpp"
#include "nerkit/crf/tagset.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::crf {

// Linear-chain CRF parameters. The transition table carries one extra row
// (sentence start) and one extra column (sentence end), so entry (T, j) scores
// starting in tag j and entry (i, T) scores ending in tag i.
struct CRFParams {
  ad::Tensor emission;    // {T, H}: one weight row per tag, applied to the hidden state
  ad::Tensor transition;  // {T+1, T+1}
  ad::Tensor mask;        // {T+1, T+1} of 0 / -inf, constant; undefined when unmasked

  static CRFParams zeros(std::size_t num_labels, std::size_t hidden);
  // Xavier-uniform emission rows, zero transitions.
  static CRFParams random(std::size_t num_labels, std::size_t hidden, Rng& rng);

  std::size_t num_labels() const { return emission.dim(0); }
  std::size_t hidden_dim() const { return emission.dim(1); }
  std::size_t boundary() const { return num_labels(); }

  // Sets every transition the tag set forbids (see TagSet::allowed) to -inf.
  void mask_illegal(const TagSet& tags);
  bool masked() const { return mask.defined(); }
  // transition + mask, as used by every scoring routine.
  ad::Tensor effective_transition(ad::Graph& g) const;
};

// {n, H} hidden states -> {n, T} per-tag scores.
ad::Tensor emissions(ad::Graph& g, const CRFParams& p, const ad::Tensor& hidden);

// The routines below take either hidden states {n, H} (or a list of n
// vectors) or, in the *_emissions forms, precomputed scores {n, T}.
ad::Tensor score_emissions(ad::Graph& g, const CRFParams& p, const ad::Tensor& scores,
                           std::span<const std::size_t> labels);
ad::Tensor log_partition_emissions(ad::Graph& g, const CRFParams& p, const ad::Tensor& scores);

ad::Tensor score_sequence(ad::Graph& g, const CRFParams& p, const ad::Tensor& hidden,
                          std::span<const std::size_t> labels);
ad::Tensor score_sequence(ad::Graph& g, const CRFParams& p, std::span<const ad::Tensor> hs,
                          std::span<const std::size_t> labels);
// Forward algorithm in log space.
ad::Tensor log_partition(ad::Graph& g, const CRFParams& p, const ad::Tensor& hidden);
ad::Tensor log_partition(ad::Graph& g, const CRFParams& p, std::span<const ad::Tensor> hs);
ad::Tensor log_prob(ad::Graph& g, const CRFParams& p, const ad::Tensor& hidden, std::span<const std::size_t> labels);
ad::Tensor log_prob(ad::Graph& g, const CRFParams& p, std::span<const ad::Tensor> hs,
                    std::span<const std::size_t> labels);

struct Decoded {
  std::vector<std::size_t> labels;
  double score = 0.0;
};

// Max-product dynamic program with backpointers; ties go to the lowest tag id.
Decoded viterbi_emissions(const CRFParams& p, const ad::Tensor& scores);
Decoded viterbi_decode(const CRFParams& p, const ad::Tensor& hidden);
Decoded viterbi_decode(const CRFParams& p, std::span<const ad::Tensor> hs);

struct Example {
  ad::Tensor hidden;  // {n, H}
  std::vector<std::size_t> labels;
};

// -sum_i log P(y_i | s_i) + (lambda / 2) * sum_theta ||theta||^2.
ad::Tensor nll_loss(ad::Graph& g, const CRFParams& p, std::span<const Example> batch, double lambda,
                    std::span<const ad::Tensor> theta);

// (lambda / 2) * sum ||theta||^2 as a graph node.
ad::Tensor l2_penalty(ad::Graph& g, double lambda, std::span<const ad::Tensor> theta);

// Softmax classification head used in place of the CRF.
struct LinearHead {
  ad::Tensor weight;  // {T, H}
  ad::Tensor bias;    // {T}

  static LinearHead zeros(std::size_t num_labels, std::size_t hidden);
  static LinearHead random(std::size_t num_labels, std::size_t hidden, Rng& rng);
  std::size_t num_labels() const { return weight.dim(0); }
};

// Row-wise log-softmax over tags: {n, H} -> {n, T}.
ad::Tensor linear_log_probs(ad::Graph& g, const LinearHead& head, const ad::Tensor& hidden);
// Summed token cross-entropy; positions labelled kPadLabel are skipped.
ad::Tensor linear_loss(ad::Graph& g, const LinearHead& head, const ad::Tensor& hidden,
                       std::span<const std::size_t> labels);
std::vector<std::size_t> linear_decode(const LinearHead& head, const ad::Tensor& hidden);

}  // namespace nerkit::crf
