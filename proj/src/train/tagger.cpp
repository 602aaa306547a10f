#include "nerkit/train/tagger.hpp"

#include <algorithm>

#include "nerkit/error.hpp"
#include "nerkit/log.hpp"

namespace nerkit::train {

namespace {

bool needs_tokenizer(const TrainConfig& c) {
  return uses_transformer(c.model_kind) || c.composer.use_subword;
}

std::vector<std::size_t> label_ids(const crf::TagSet& tags, const data::LabeledSentence& s) {
  std::vector<std::size_t> out;
  for (const auto& t : s.tokens) out.push_back(tags.id(t.tag));
  return out;
}

}  // namespace

TaggerVocabs build_tagger_vocabs(const TrainConfig& config, const data::Corpus& train) {
  TaggerVocabs v;
  v.base = data::build_vocab(train);
  if (needs_tokenizer(config)) {
    std::vector<std::string> lines;
    for (const auto& s : train) {
      std::string line;
      for (const auto& t : s.tokens) line += t.surface + " ";
      lines.push_back(line);
    }
    tok::UnigramTrainOptions opt;
    opt.seed = config.seed;
    opt.vocab_size = config.tokenizer_vocab_size;
    const std::size_t alphabet = tok::alphabet_size(lines);
    if (opt.vocab_size < alphabet) {
      warn("tokenizer_vocab_size " + std::to_string(opt.vocab_size) + " raised to the alphabet size " +
           std::to_string(alphabet));
      opt.vocab_size = alphabet;
    }
    v.tokenizer = tok::train_unigram(lines, opt);
    v.has_tokenizer = true;
    for (const auto& p : v.tokenizer.pieces()) v.pieces.add(p.text);
  }
  return v;
}

Tagger Tagger::build(const TrainConfig& config, TaggerVocabs vocabs, Rng& rng) {
  config.validate();
  if (needs_tokenizer(config) && !vocabs.has_tokenizer) throw ConfigError("this model needs a subword tokenizer");
  Tagger t;
  t.config_ = config;
  t.vocabs_ = std::move(vocabs);
  const std::size_t labels = t.vocabs_.base.tags.size();
  std::size_t hidden = 0;
  if (uses_transformer(config.model_kind)) {
    t.transformer_ = enc::TransformerParams::init(config.transformer, t.vocabs_.pieces.size(), rng);
    hidden = config.transformer.hidden_units;
  } else {
    t.composer_ = enc::InputComposer::create(
        config.composer,
        {t.vocabs_.base.words, t.vocabs_.base.chars, t.vocabs_.base.morph_chars, t.vocabs_.pieces}, rng);
    t.encoder_ = enc::BiLSTMParams::init(config.composer.output_dim(), config.encoder_hidden, rng);
    hidden = t.encoder_.output_dim();
  }
  if (uses_crf(config.model_kind)) {
    t.crf_ = crf::CRFParams::random(labels, hidden, rng);
    if (config.mask_illegal) t.crf_.mask_illegal(t.vocabs_.base.tags);
  } else {
    t.linear_ = crf::LinearHead::random(labels, hidden, rng);
  }
  return t;
}

Tagger Tagger::create(const TrainConfig& config, const data::Corpus& train, Rng& rng) {
  config.validate();
  Tagger t = build(config, build_tagger_vocabs(config, train), rng);
  if (!config.pretrained_embeddings.empty()) {
    if (uses_transformer(config.model_kind) || !config.composer.use_word)
      throw ConfigError("pretrained_embeddings needs a model with word embeddings");
    t.pretrained_ = enc::init_embeddings_pretrained(t.composer_.words, config.pretrained_embeddings, rng);
  }
  return t;
}

std::vector<ad::NamedTensor> Tagger::parameters() const {
  std::vector<ad::NamedTensor> out;
  auto append = [&out](std::vector<ad::NamedTensor> more) { out.insert(out.end(), more.begin(), more.end()); };
  if (uses_transformer(config_.model_kind)) {
    append(transformer_.named("transformer"));
  } else {
    append(composer_.parameters());
    append(encoder_.named("encoder"));
  }
  if (uses_crf(config_.model_kind)) {
    out.push_back({"crf.emission", crf_.emission});
    out.push_back({"crf.transition", crf_.transition});
  } else {
    out.push_back({"linear.weight", linear_.weight});
    out.push_back({"linear.bias", linear_.bias});
  }
  return out;
}

Tagger::Encoded Tagger::encode(ad::Graph& g, const std::vector<std::string>& surfaces,
                               const std::vector<std::optional<std::string>>& morphs,
                               const std::vector<std::size_t>& labels, bool training, Rng& rng) const {
  Encoded e;
  e.words = surfaces.size();
  if (!uses_transformer(config_.model_kind)) {
    std::vector<ad::Tensor> xs;
    xs.reserve(surfaces.size());
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
      enc::TokenContext ctx{surfaces[i], i < morphs.size() ? morphs[i] : std::nullopt, {}};
      if (config_.composer.use_subword) ctx.pieces = tok::segment_word(vocabs_.tokenizer, surfaces[i]);
      xs.push_back(g.dropout(enc::compose_input(g, composer_, ctx), config_.dropout_p, training, rng));
    }
    auto hs = enc::bilstm_encode(g, encoder_, xs);
    for (auto& h : hs) h = g.dropout(h, config_.dropout_p, training, rng);
    e.hidden = g.stack(hs);
    e.labels = labels;
    return e;
  }

  e.aligned = tok::align_words(vocabs_.tokenizer, surfaces, labels);
  std::vector<std::size_t> ids;
  for (const auto& p : e.aligned.pieces) ids.push_back(vocabs_.pieces.id(p));
  auto out = enc::transformer_encode(g, transformer_, ids, training, rng);
  const std::size_t rows = out.hidden.dim(0);
  if (config_.model_kind == ModelKind::TransformerLinear) {
    e.hidden = out.hidden;
    e.labels.assign(e.aligned.labels.begin(), e.aligned.labels.begin() + static_cast<std::ptrdiff_t>(rows));
    return e;
  }
  std::vector<std::size_t> initial;
  for (std::size_t k = 0; k < rows; ++k)
    if (e.aligned.is_word_initial[k]) initial.push_back(k);
  e.hidden = g.gather_rows(out.hidden, initial);
  e.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(initial.size()));
  return e;
}

ad::Tensor Tagger::loss(ad::Graph& g, const data::LabeledSentence& sentence, bool training, Rng& rng) const {
  if (sentence.tokens.empty()) throw UsageError("cannot compute the loss of an empty sentence");
  std::vector<std::optional<std::string>> morphs;
  for (const auto& t : sentence.tokens) morphs.push_back(t.morph);
  Encoded e = encode(g, sentence.surfaces(), morphs, label_ids(tags(), sentence), training, rng);
  if (uses_crf(config_.model_kind)) return g.scale(crf::log_prob(g, crf_, e.hidden, e.labels), -1.0);
  return crf::linear_loss(g, linear_, e.hidden, e.labels);
}

std::vector<std::string> Tagger::predict(const std::vector<std::string>& surfaces,
                                         const std::vector<std::optional<std::string>>& morphs) const {
  if (surfaces.empty()) return {};
  ad::Graph g(false);
  Rng unused(0);
  Encoded e = encode(g, surfaces, morphs, std::vector<std::size_t>(surfaces.size(), tags().outside_id()), false,
                     unused);
  std::vector<std::size_t> word_labels;
  if (uses_crf(config_.model_kind)) {
    word_labels = crf::viterbi_decode(crf_, e.hidden).labels;
  } else if (config_.model_kind == ModelKind::BiLstmLinear) {
    word_labels = crf::linear_decode(linear_, e.hidden);
  } else {
    auto piece_labels = crf::linear_decode(linear_, e.hidden);
    piece_labels.resize(e.aligned.pieces.size(), tags().outside_id());
    word_labels = tok::project_predictions(e.aligned, piece_labels);
  }
  // Words cut off by transformer truncation are tagged O.
  word_labels.resize(surfaces.size(), tags().outside_id());
  auto out = tags().names(word_labels);
  if (!uses_crf(config_.model_kind) || !config_.mask_illegal) out = data::repair_bio2(std::move(out));
  return out;
}

std::vector<std::string> Tagger::predict(const data::LabeledSentence& sentence) const {
  std::vector<std::optional<std::string>> morphs;
  for (const auto& t : sentence.tokens) morphs.push_back(t.morph);
  return predict(sentence.surfaces(), morphs);
}

}  // namespace nerkit::train
