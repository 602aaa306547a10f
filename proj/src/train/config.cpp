#include "nerkit/train/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "nerkit/error.hpp"

namespace nerkit::train {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::BiLstmCrf: return "bilstm-crf";
    case ModelKind::BiLstmLinear: return "bilstm-linear";
    case ModelKind::TransformerCrf: return "transformer-crf";
    case ModelKind::TransformerLinear: return "transformer-linear";
  }
  return "?";
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::SgdMomentum ? "sgd-momentum" : "adam-decoupled-decay";
}

bool uses_transformer(ModelKind kind) {
  return kind == ModelKind::TransformerCrf || kind == ModelKind::TransformerLinear;
}

bool uses_crf(ModelKind kind) { return kind == ModelKind::BiLstmCrf || kind == ModelKind::TransformerCrf; }

TrainConfig TrainConfig::transformer_defaults(ModelKind kind) {
  TrainConfig c;
  c.model_kind = kind;
  c.optimizer = OptimizerKind::AdamDecoupled;
  c.lr = 5e-5;
  c.lr_decay = false;
  c.clip_norm = 1.0;
  c.dropout_p = 0.1;
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

struct Field {
  std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Field size_field(T TrainConfig::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.*member = static_cast<T>(parse_uint(k, v));
          },
          [member](const TrainConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(double TrainConfig::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) { c.*member = parse_double(k, v); },
          [member](const TrainConfig& c) { return fmt(c.*member); }};
}

Field bool_field(bool TrainConfig::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) { c.*member = parse_bool(k, v); },
          [member](const TrainConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

template <typename Get>
Field nested(Get get) {
  using T = std::remove_reference_t<decltype(get(std::declval<TrainConfig&>()))>;
  return {[get](TrainConfig& c, const std::string& k, const std::string& v) {
            T& ref = get(c);
            if constexpr (std::is_same_v<T, bool>)
              ref = parse_bool(k, v);
            else if constexpr (std::is_same_v<T, double>)
              ref = parse_double(k, v);
            else
              ref = static_cast<T>(parse_uint(k, v));
          },
          [get](const TrainConfig& c) {
            const T& ref = get(const_cast<TrainConfig&>(c));
            if constexpr (std::is_same_v<T, bool>)
              return std::string(ref ? "true" : "false");
            else if constexpr (std::is_same_v<T, double>)
              return fmt(ref);
            else
              return std::to_string(ref);
          }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.push_back({"model_kind",
                 {[](TrainConfig& c, const std::string& k, const std::string& v) {
                    for (auto kind : {ModelKind::BiLstmCrf, ModelKind::BiLstmLinear, ModelKind::TransformerCrf,
                                      ModelKind::TransformerLinear})
                      if (v == to_string(kind)) {
                        c.model_kind = kind;
                        return;
                      }
                    throw ConfigError(k + ": unknown model '" + v +
                                      "' (bilstm-crf, bilstm-linear, transformer-crf, transformer-linear)");
                  },
                  [](const TrainConfig& c) { return to_string(c.model_kind); }}});
    t.push_back({"use_word", nested([](TrainConfig& c) -> bool& { return c.composer.use_word; })});
    t.push_back({"use_char", nested([](TrainConfig& c) -> bool& { return c.composer.use_char; })});
    t.push_back({"use_morph", nested([](TrainConfig& c) -> bool& { return c.composer.use_morph; })});
    t.push_back({"use_subword", nested([](TrainConfig& c) -> bool& { return c.composer.use_subword; })});
    t.push_back({"word_dim", nested([](TrainConfig& c) -> std::size_t& { return c.composer.word_dim; })});
    t.push_back({"char_dim", nested([](TrainConfig& c) -> std::size_t& { return c.composer.char_dim; })});
    t.push_back({"morph_dim", nested([](TrainConfig& c) -> std::size_t& { return c.composer.morph_dim; })});
    t.push_back({"subword_dim", nested([](TrainConfig& c) -> std::size_t& { return c.composer.subword_dim; })});
    t.push_back({"char_hidden", nested([](TrainConfig& c) -> std::size_t& { return c.composer.char_hidden; })});
    t.push_back({"morph_hidden", nested([](TrainConfig& c) -> std::size_t& { return c.composer.morph_hidden; })});
    t.push_back(
        {"subword_hidden", nested([](TrainConfig& c) -> std::size_t& { return c.composer.subword_hidden; })});
    t.push_back({"encoder_hidden", size_field(&TrainConfig::encoder_hidden)});
    t.push_back({"tf_layers", nested([](TrainConfig& c) -> std::size_t& { return c.transformer.num_layers; })});
    t.push_back({"tf_heads", nested([](TrainConfig& c) -> std::size_t& { return c.transformer.num_heads; })});
    t.push_back({"tf_hidden", nested([](TrainConfig& c) -> std::size_t& { return c.transformer.hidden_units; })});
    t.push_back({"tf_ff", nested([](TrainConfig& c) -> std::size_t& { return c.transformer.ff_units; })});
    t.push_back({"tf_max_len", nested([](TrainConfig& c) -> std::size_t& { return c.transformer.max_len; })});
    t.push_back({"tf_dropout", nested([](TrainConfig& c) -> double& { return c.transformer.dropout_p; })});
    t.push_back({"tokenizer_vocab_size", size_field(&TrainConfig::tokenizer_vocab_size)});
    t.push_back({"mask_illegal", bool_field(&TrainConfig::mask_illegal)});
    t.push_back({"optimizer",
                 {[](TrainConfig& c, const std::string& k, const std::string& v) {
                    if (v == "sgd-momentum" || v == "sgd")
                      c.optimizer = OptimizerKind::SgdMomentum;
                    else if (v == "adam-decoupled-decay" || v == "adamw" || v == "adam")
                      c.optimizer = OptimizerKind::AdamDecoupled;
                    else
                      throw ConfigError(k + ": unknown optimizer '" + v + "' (sgd-momentum, adam-decoupled-decay)");
                  },
                  [](const TrainConfig& c) { return to_string(c.optimizer); }}});
    t.push_back({"lr", double_field(&TrainConfig::lr)});
    t.push_back({"momentum", double_field(&TrainConfig::momentum)});
    t.push_back({"lr_decay", bool_field(&TrainConfig::lr_decay)});
    t.push_back({"adam_beta1", double_field(&TrainConfig::adam_beta1)});
    t.push_back({"adam_beta2", double_field(&TrainConfig::adam_beta2)});
    t.push_back({"adam_eps", double_field(&TrainConfig::adam_eps)});
    t.push_back({"weight_decay", double_field(&TrainConfig::weight_decay)});
    t.push_back({"clip_norm", double_field(&TrainConfig::clip_norm)});
    t.push_back({"dropout_p", double_field(&TrainConfig::dropout_p)});
    t.push_back({"epochs", size_field(&TrainConfig::epochs)});
    t.push_back({"lambda_l2", double_field(&TrainConfig::lambda_l2)});
    t.push_back({"seed", size_field(&TrainConfig::seed)});
    t.push_back({"batch_size", size_field(&TrainConfig::batch_size)});
    t.push_back({"valid_fraction", double_field(&TrainConfig::valid_fraction)});
    t.push_back({"max_sentence_len", size_field(&TrainConfig::max_sentence_len)});
    t.push_back({"pretrained_embeddings",
                 {[](TrainConfig& c, const std::string&, const std::string& v) { c.pretrained_embeddings = v; },
                  [](const TrainConfig& c) { return c.pretrained_embeddings; }}});
    return t;
  }();
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void TrainConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, key, trim(value)); }

std::string TrainConfig::get(const std::string& key) const { return field(key).get(*this); }

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout_p must be in [0, 1)");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm must be >= 0 (0 disables clipping)");
  if (!(lambda_l2 >= 0.0)) throw ConfigError("lambda_l2 must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) throw ConfigError("valid_fraction must be in (0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ConfigError("adam betas must be in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
  if (max_sentence_len < 1) throw ConfigError("max_sentence_len must be >= 1");
  if (uses_transformer(model_kind)) {
    transformer.validate();
    if (tokenizer_vocab_size < 1) throw ConfigError("tokenizer_vocab_size must be >= 1");
  } else {
    composer.validate();
    if (encoder_hidden < 1) throw ConfigError("encoder_hidden must be >= 1");
  }
}

TrainConfig parse_config(std::istream& in, TrainConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

TrainConfig read_config_file(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, std::move(base));
}

void write_config(const TrainConfig& config, std::ostream& out) { out << config_text(config); }

std::string config_text(const TrainConfig& config) {
  std::string s;
  for (const auto& [name, f] : fields()) s += name + " = " + f.get(config) + "\n";
  return s;
}

}  // namespace nerkit::train
