#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nerkit/crf/crf.hpp"
#include "nerkit/data/vocab.hpp"
#include "nerkit/encoders/composer.hpp"
#include "nerkit/encoders/embedding.hpp"
#include "nerkit/encoders/transformer.hpp"
#include "nerkit/tokenize/unigram.hpp"
#include "nerkit/train/config.hpp"

namespace nerkit::train {

struct TaggerVocabs {
  data::Vocabularies base;
  data::Vocab pieces;         // ids for subword pieces; empty unless a tokenizer is used
  tok::UnigramVocab tokenizer;
  bool has_tokenizer = false;
};

// Vocabularies from a training corpus. Trains the subword tokenizer when the
// configuration needs one.
TaggerVocabs build_tagger_vocabs(const TrainConfig& config, const data::Corpus& train);

class Tagger {
 public:
  // Fresh parameters for the given vocabularies.
  static Tagger build(const TrainConfig& config, TaggerVocabs vocabs, Rng& rng);
  // build() from vocabularies of `train`, plus pretrained embeddings if configured.
  static Tagger create(const TrainConfig& config, const data::Corpus& train, Rng& rng);

  const TrainConfig& config() const { return config_; }
  const TaggerVocabs& vocabs() const { return vocabs_; }
  const crf::TagSet& tags() const { return vocabs_.base.tags; }
  std::optional<enc::EmbeddingInitReport> pretrained_report() const { return pretrained_; }

  // Trainable tensors with stable names.
  std::vector<ad::NamedTensor> parameters() const;

  // Negative log-likelihood (CRF heads) or summed token cross-entropy
  // (linear heads) of one sentence; no regularization.
  ad::Tensor loss(ad::Graph& g, const data::LabeledSentence& sentence, bool training, Rng& rng) const;

  // Word-level BIO2 tags. Linear-head output is repaired to valid BIO2.
  std::vector<std::string> predict(const std::vector<std::string>& surfaces,
                                   const std::vector<std::optional<std::string>>& morphs = {}) const;
  std::vector<std::string> predict(const data::LabeledSentence& sentence) const;

 private:
  TrainConfig config_;
  TaggerVocabs vocabs_;
  enc::InputComposer composer_;
  enc::BiLSTMParams encoder_;
  enc::TransformerParams transformer_;
  crf::CRFParams crf_;
  crf::LinearHead linear_;
  std::optional<enc::EmbeddingInitReport> pretrained_;

  struct Encoded {
    ad::Tensor hidden;                      // rows the head scores
    std::vector<std::size_t> labels;        // per row; kPadLabel for padding pieces
    tok::AlignedSequence aligned;           // transformer only
    std::size_t words = 0;
  };
  Encoded encode(ad::Graph& g, const std::vector<std::string>& surfaces,
                 const std::vector<std::optional<std::string>>& morphs, const std::vector<std::size_t>& labels,
                 bool training, Rng& rng) const;
};

}  // namespace nerkit::train
