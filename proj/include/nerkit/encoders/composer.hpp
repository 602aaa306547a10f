#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nerkit/encoders/embedding.hpp"
#include "nerkit/encoders/lstm.hpp"

namespace nerkit::enc {

// Which embedding sources make up a token's input vector. The character,
// morphological and subword sources each run their own BiLSTM and contribute
// 2 * hidden dimensions.
struct ComposerConfig {
  bool use_word = true;
  bool use_char = true;
  bool use_morph = false;
  bool use_subword = false;
  std::size_t word_dim = 300;
  std::size_t subword_dim = 300;
  std::size_t char_dim = 200;
  std::size_t morph_dim = 200;
  std::size_t char_hidden = 100;
  std::size_t morph_hidden = 100;
  std::size_t subword_hidden = 150;

  void validate() const;
  std::size_t output_dim() const;
};

struct TokenContext {
  std::string surface;
  std::optional<std::string> morph;
  std::vector<std::string> pieces;  // subword segmentation of the surface form
};

// Embeds each character of `word` and returns the final BiLSTM states.
// Unknown characters use the unk row.
ad::Tensor char_compose(ad::Graph& g, const EmbeddingTable& chars, const BiLSTMParams& lstm, std::string_view word);
// Same architecture over the characters of a morphological analysis string.
ad::Tensor morph_compose(ad::Graph& g, const EmbeddingTable& chars, const BiLSTMParams& lstm,
                         std::string_view analysis);
ad::Tensor subword_compose(ad::Graph& g, const EmbeddingTable& pieces, const BiLSTMParams& lstm,
                           std::span<const std::string> segmented);

struct ComposerVocabs {
  data::Vocab words;
  data::Vocab chars;
  data::Vocab morph_chars;
  data::Vocab pieces;
};

// Embedding tables and composer networks for the enabled sources. Tables of
// disabled sources stay undefined.
struct InputComposer {
  ComposerConfig config;
  EmbeddingTable words;
  EmbeddingTable chars;
  EmbeddingTable morph_chars;
  EmbeddingTable pieces;
  BiLSTMParams char_lstm;
  BiLSTMParams morph_lstm;
  BiLSTMParams subword_lstm;

  static InputComposer create(const ComposerConfig& config, const ComposerVocabs& vocabs, Rng& rng);
  std::vector<ad::NamedTensor> parameters() const;
};

// Concatenates enabled sources in the order word, char, morph, subword.
// Tokens without an analysis feed their surface form to the morph source.
ad::Tensor compose_input(ad::Graph& g, const InputComposer& composer, const TokenContext& token);

}  // namespace nerkit::enc
