#include "nerkit/encoders/composer.hpp"

#include "nerkit/error.hpp"
#include "nerkit/utf8.hpp"

namespace nerkit::enc {

void ComposerConfig::validate() const {
  if (!use_word && !use_char && !use_morph && !use_subword)
    throw ConfigError("at least one embedding source must be enabled");
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  if (use_word) positive(word_dim, "word_dim");
  if (use_char) {
    positive(char_dim, "char_dim");
    positive(char_hidden, "char_hidden");
  }
  if (use_morph) {
    positive(morph_dim, "morph_dim");
    positive(morph_hidden, "morph_hidden");
  }
  if (use_subword) {
    positive(subword_dim, "subword_dim");
    positive(subword_hidden, "subword_hidden");
  }
}

std::size_t ComposerConfig::output_dim() const {
  std::size_t d = 0;
  if (use_word) d += word_dim;
  if (use_char) d += 2 * char_hidden;
  if (use_morph) d += 2 * morph_hidden;
  if (use_subword) d += 2 * subword_hidden;
  return d;
}

namespace {

ad::Tensor compose_chars(ad::Graph& g, const EmbeddingTable& chars, const BiLSTMParams& lstm, std::string_view text) {
  std::vector<ad::Tensor> xs;
  for (const auto& ch : utf8::chars(text)) xs.push_back(chars.embed(g, ch));
  if (xs.empty()) xs.push_back(g.lookup(chars.matrix, chars.unk_id()));
  return bilstm_final(g, lstm, xs);
}

}  // namespace

ad::Tensor char_compose(ad::Graph& g, const EmbeddingTable& chars, const BiLSTMParams& lstm, std::string_view word) {
  return compose_chars(g, chars, lstm, word);
}

ad::Tensor morph_compose(ad::Graph& g, const EmbeddingTable& chars, const BiLSTMParams& lstm,
                         std::string_view analysis) {
  return compose_chars(g, chars, lstm, analysis);
}

ad::Tensor subword_compose(ad::Graph& g, const EmbeddingTable& pieces, const BiLSTMParams& lstm,
                           std::span<const std::string> segmented) {
  std::vector<ad::Tensor> xs;
  for (const auto& piece : segmented) xs.push_back(pieces.embed(g, piece));
  if (xs.empty()) xs.push_back(g.lookup(pieces.matrix, pieces.unk_id()));
  return bilstm_final(g, lstm, xs);
}

InputComposer InputComposer::create(const ComposerConfig& config, const ComposerVocabs& vocabs, Rng& rng) {
  config.validate();
  InputComposer c;
  c.config = config;
  if (config.use_word) c.words = EmbeddingTable::random(vocabs.words, config.word_dim, rng);
  if (config.use_char) {
    c.chars = EmbeddingTable::random(vocabs.chars, config.char_dim, rng);
    c.char_lstm = BiLSTMParams::init(config.char_dim, config.char_hidden, rng);
  }
  if (config.use_morph) {
    c.morph_chars = EmbeddingTable::random(vocabs.morph_chars, config.morph_dim, rng);
    c.morph_lstm = BiLSTMParams::init(config.morph_dim, config.morph_hidden, rng);
  }
  if (config.use_subword) {
    c.pieces = EmbeddingTable::random(vocabs.pieces, config.subword_dim, rng);
    c.subword_lstm = BiLSTMParams::init(config.subword_dim, config.subword_hidden, rng);
  }
  return c;
}

std::vector<ad::NamedTensor> InputComposer::parameters() const {
  std::vector<ad::NamedTensor> out;
  auto append = [&out](std::vector<ad::NamedTensor> more) { out.insert(out.end(), more.begin(), more.end()); };
  if (config.use_word) out.push_back({"embed.word", words.matrix});
  if (config.use_char) {
    out.push_back({"embed.char", chars.matrix});
    append(char_lstm.named("char_lstm"));
  }
  if (config.use_morph) {
    out.push_back({"embed.morph", morph_chars.matrix});
    append(morph_lstm.named("morph_lstm"));
  }
  if (config.use_subword) {
    out.push_back({"embed.subword", pieces.matrix});
    append(subword_lstm.named("subword_lstm"));
  }
  return out;
}

ad::Tensor compose_input(ad::Graph& g, const InputComposer& composer, const TokenContext& token) {
  const auto& cfg = composer.config;
  std::vector<ad::Tensor> parts;
  if (cfg.use_word) parts.push_back(composer.words.embed(g, token.surface));
  if (cfg.use_char) parts.push_back(char_compose(g, composer.chars, composer.char_lstm, token.surface));
  if (cfg.use_morph)
    parts.push_back(morph_compose(g, composer.morph_chars, composer.morph_lstm,
                                  token.morph ? std::string_view(*token.morph) : std::string_view(token.surface)));
  if (cfg.use_subword) {
    if (token.pieces.empty()) {
      const std::string whole = token.surface;
      parts.push_back(subword_compose(g, composer.pieces, composer.subword_lstm, std::span(&whole, 1)));
    } else {
      parts.push_back(subword_compose(g, composer.pieces, composer.subword_lstm, token.pieces));
    }
  }
  return g.concat(parts);
}

}  // namespace nerkit::enc
