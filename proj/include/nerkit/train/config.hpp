#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nerkit/encoders/composer.hpp"
#include "nerkit/encoders/transformer.hpp"

namespace nerkit::train {

enum class ModelKind { BiLstmCrf, BiLstmLinear, TransformerCrf, TransformerLinear };
enum class OptimizerKind { SgdMomentum, AdamDecoupled };

std::string to_string(ModelKind kind);
std::string to_string(OptimizerKind kind);
bool uses_transformer(ModelKind kind);
bool uses_crf(ModelKind kind);

struct TrainConfig {
  ModelKind model_kind = ModelKind::BiLstmCrf;
  enc::ComposerConfig composer;
  std::size_t encoder_hidden = 256;
  enc::ToyTransformerConfig transformer;
  std::size_t tokenizer_vocab_size = 2000;
  bool mask_illegal = true;

  OptimizerKind optimizer = OptimizerKind::SgdMomentum;
  double lr = 0.05;
  double momentum = 0.9;
  bool lr_decay = true;  // sgd only
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 0.5;
  double dropout_p = 0.5;
  std::size_t epochs = 30;
  double lambda_l2 = 1e-8;
  std::uint64_t seed = 1;
  std::size_t batch_size = 10;
  double valid_fraction = 0.1;
  std::size_t max_sentence_len = 512;
  std::string pretrained_embeddings;  // empty: random init

  // Settings for the transformer recipe (adam, lr 5e-5, clip 1).
  static TrainConfig transformer_defaults(ModelKind kind = ModelKind::TransformerCrf);

  // Throws ConfigError for an unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  void validate() const;
};

// Every key accepted by set(), in a fixed order.
const std::vector<std::string>& config_keys();

// Flat "key = value" lines; '#' starts a comment.
TrainConfig parse_config(std::istream& in, TrainConfig base = {});
TrainConfig read_config_file(const std::string& path, TrainConfig base = {});
void write_config(const TrainConfig& config, std::ostream& out);
std::string config_text(const TrainConfig& config);

}  // namespace nerkit::train
