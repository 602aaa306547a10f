// nerkit command-line interface.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "nerkit/data/corpus.hpp"
#include "nerkit/error.hpp"
#include "nerkit/eval/score.hpp"
#include "nerkit/tokenize/unigram.hpp"
#include "nerkit/train/artifact.hpp"
#include "nerkit/train/bench.hpp"
#include "nerkit/train/synth.hpp"
#include "nerkit/train/trainer.hpp"

using namespace nerkit;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3 };

struct ConfigOverrides {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "Flat key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : train::config_keys()) {
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      std::string names = "--" + key;
      if (dashed != key) names += ",--" + dashed;
      cmd->add_option_function<std::string>(
             names, [this, key](const std::string& v) { values[key] = v; }, "Override config key " + key)
          ->group("Config keys");
    }
  }

  train::TrainConfig apply(const train::TrainConfig& base) const {
    train::TrainConfig cfg = config_file.empty() ? base : train::read_config_file(config_file, base);
    for (const auto& [k, v] : values) cfg.set(k, v);
    return cfg;
  }

  // Transformer kinds start from their own optimizer defaults; explicit
  // settings still win.
  train::TrainConfig resolve() const {
    train::TrainConfig cfg = apply({});
    if (train::uses_transformer(cfg.model_kind)) cfg = apply(train::TrainConfig::transformer_defaults(cfg.model_kind));
    cfg.validate();
    return cfg;
  }
};

data::Corpus read_corpus(const std::string& path, bool repair) {
  data::Corpus c = data::read_conll_file(path);
  for (std::size_t i = 0; i < c.size(); ++i) {
    try {
      c[i] = data::validate_bio2(c[i], repair ? data::BioMode::Repair : data::BioMode::Strict);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": sentence " + std::to_string(i + 1) + ": " + e.what() +
                                " (use --repair to fix I- tags automatically)",
                            e.index());
    }
  }
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

void print_report(const eval::EvalReport& r, const std::string& format) {
  std::ostringstream o;
  if (format == "kv")
    eval::write_key_values(r, o);
  else
    eval::write_table(r, o);
  std::cout << o.str();
}

// Raw input: one sentence per line, whitespace-separated tokens.
data::Corpus read_raw(std::istream& in) {
  data::Corpus c;
  std::string line;
  while (std::getline(in, line)) {
    data::LabeledSentence s;
    for (const auto& w : tok::split_words(line)) s.tokens.push_back({w, std::nullopt, "O"});
    if (!s.tokens.empty()) c.push_back(std::move(s));
  }
  return c;
}

std::vector<train::BenchEntry> ablation_preset(const train::TrainConfig& base) {
  auto make = [&](const std::string& name, train::ModelKind kind, bool word, bool chars, bool morph) {
    train::TrainConfig c = base;
    c.model_kind = kind;
    c.composer.use_word = word;
    c.composer.use_char = chars;
    c.composer.use_morph = morph;
    return train::BenchEntry{name, c};
  };
  using train::ModelKind;
  return {make("Word-BiLSTM", ModelKind::BiLstmLinear, true, false, false),
          make("Word-BiLSTM-CRF", ModelKind::BiLstmCrf, true, false, false),
          make("Word-Char-BiLSTM", ModelKind::BiLstmLinear, true, true, false),
          make("Word-Char-BiLSTM-CRF", ModelKind::BiLstmCrf, true, true, false),
          make("Word-Char-Morph-BiLSTM-CRF", ModelKind::BiLstmCrf, true, true, true)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nerkit: named entity tagging with BiLSTM-CRF and transformer encoders"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a tagger on a CoNLL corpus");
  std::string train_path, valid_path, model_out, metrics_path;
  bool repair = false;
  ConfigOverrides train_cfg;
  train_cmd->add_option("--train", train_path, "Training corpus (CoNLL)")->required();
  train_cmd->add_option("--valid", valid_path, "Validation corpus; default: split off valid_fraction of --train");
  train_cmd->add_option("--model", model_out, "Output model file")->required();
  train_cmd->add_option("--metrics", metrics_path, "Per-epoch metrics log (tab-separated)");
  train_cmd->add_flag("--repair", repair, "Repair invalid BIO2 tags instead of rejecting them");
  train_cfg.attach(train_cmd);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Tag a labeled corpus and score it");
  std::string eval_model, eval_data, eval_format = "table";
  bool eval_repair = false;
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--data", eval_data)->required();
  eval_cmd->add_option("--format", eval_format)->check(CLI::IsMember({"table", "kv"}));
  eval_cmd->add_flag("--repair", eval_repair);

  // tag
  auto* tag_cmd = app.add_subcommand("tag", "Tag raw sentences (one per line) or a CoNLL file");
  std::string tag_model, tag_input = "-", tag_output = "-";
  bool tag_conll = false;
  tag_cmd->add_option("--model", tag_model)->required();
  tag_cmd->add_option("--input", tag_input, "Input file, '-' for stdin");
  tag_cmd->add_option("--output", tag_output, "Output CoNLL file, '-' for stdout");
  tag_cmd->add_flag("--conll", tag_conll, "Input is CoNLL; existing tags are ignored");

  // tokenizer-train
  auto* tok_cmd = app.add_subcommand("tokenizer-train", "Train a unigram subword tokenizer on raw text");
  std::string tok_input, tok_output;
  tok::UnigramTrainOptions tok_opt;
  tok_cmd->add_option("--input", tok_input)->required();
  tok_cmd->add_option("--output", tok_output, "Vocabulary file (piece<TAB>log_prob)")->required();
  tok_cmd->add_option("--vocab-size,--vocab_size", tok_opt.vocab_size);
  tok_cmd->add_option("--seed", tok_opt.seed);
  tok_cmd->add_option("--max-piece-chars", tok_opt.max_piece_chars);

  // score
  auto* score_cmd = app.add_subcommand("score", "Entity-level scores of predicted against gold CoNLL files");
  std::string gold_path, pred_path, score_format = "table";
  score_cmd->add_option("--gold", gold_path)->required();
  score_cmd->add_option("--pred", pred_path)->required();
  score_cmd->add_option("--format", score_format)->check(CLI::IsMember({"table", "kv"}));

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Train several configurations over 5 seeds and compare");
  std::string bench_train, bench_valid, bench_test, bench_out;
  std::vector<std::string> bench_configs;
  std::vector<std::uint64_t> bench_seeds = train::kDefaultBenchSeeds;
  bool bench_preset = false;
  ConfigOverrides bench_cfg;
  bench_cmd->add_option("--train", bench_train)->required();
  bench_cmd->add_option("--valid", bench_valid);
  bench_cmd->add_option("--test", bench_test)->required();
  bench_cmd->add_option("--entry", bench_configs, "NAME=CONFIG_FILE, repeatable");
  bench_cmd->add_flag("--ablation", bench_preset, "Word/char/morph BiLSTM(-CRF) ablation rows");
  bench_cmd->add_option("--seeds", bench_seeds);
  bench_cmd->add_option("--out", bench_out, "Also write the table here");
  bench_cfg.attach(bench_cmd);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic NER corpus");
  train::SynthOptions synth_opt;
  std::string synth_out = "-", synth_prefix;
  bool no_morph = false;
  synth_cmd->add_option("--sentences", synth_opt.sentences)->check(CLI::Range(1, 1000000));
  synth_cmd->add_option("--seed", synth_opt.seed);
  synth_cmd->add_option("--novel-rate", synth_opt.novel_name_rate)->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_flag("--no-morph", no_morph, "Two-column output");
  synth_cmd->add_option("--output", synth_out);
  synth_cmd->add_option("--split-prefix", synth_prefix, "Write PREFIX.train/.valid/.test (80/10/10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) {
      auto cfg = train_cfg.resolve();
      data::Corpus train_set = read_corpus(train_path, repair), valid_set;
      if (valid_path.empty()) {
        auto split = data::split_corpus(train_set, cfg.valid_fraction, cfg.seed);
        train_set = std::move(split.train);
        valid_set = std::move(split.valid);
      } else {
        valid_set = read_corpus(valid_path, repair);
      }
      std::ofstream metrics;
      if (!metrics_path.empty()) {
        metrics.open(metrics_path);
        if (!metrics) throw UsageError("cannot write " + metrics_path);
      }
      std::cerr << "training " << train::to_string(cfg.model_kind) << " on " << train_set.size() << " sentences, "
                << valid_set.size() << " for validation\n";
      auto result = train::train_tagger(cfg, train_set, valid_set, [&](const train::EpochMetrics& m) {
        const std::string line = train::format_metrics(m);
        std::cout << line << std::endl;
        if (metrics) metrics << line << '\n';
      });
      if (auto rep = result.model.pretrained_report())
        std::cerr << "pretrained embeddings: " << rep->hits << "/" << rep->vocabulary << " hits\n";
      train::save_tagger_file(result.model, model_out);
      std::cerr << "best epoch " << result.best_epoch << " (valid F1 " << result.best_f1 << "), saved " << model_out
                << "\n";
    } else if (*eval_cmd) {
      auto model = train::load_tagger_file(eval_model);
      print_report(train::evaluate(model, read_corpus(eval_data, eval_repair)), eval_format);
    } else if (*tag_cmd) {
      auto model = train::load_tagger_file(tag_model);
      data::Corpus input;
      if (tag_conll) {
        input = tag_input == "-" ? data::parse_conll(std::cin) : data::read_conll_file(tag_input);
      } else if (tag_input == "-") {
        input = read_raw(std::cin);
      } else {
        std::ifstream in(tag_input);
        if (!in) throw LoadError("cannot open " + tag_input);
        input = read_raw(in);
      }
      std::ostringstream out;
      data::serialize_conll(train::tag_corpus(model, input), out);
      write_text(tag_output, out.str());
    } else if (*tok_cmd) {
      std::ifstream in(tok_input);
      if (!in) throw LoadError("cannot open " + tok_input);
      auto vocab = tok::train_unigram(in, tok_opt);
      tok::save_vocab_file(vocab, tok_output);
      std::cerr << "wrote " << vocab.size() << " pieces to " << tok_output << "\n";
    } else if (*score_cmd) {
      auto gold = data::read_conll_file(gold_path);
      auto pred = data::read_conll_file(pred_path);
      std::vector<std::vector<std::string>> g, p;
      for (const auto& s : gold) g.push_back(s.tags());
      for (const auto& s : pred) p.push_back(s.tags());
      print_report(eval::score(g, p), score_format);
    } else if (*bench_cmd) {
      auto base = bench_cfg.resolve();
      std::vector<train::BenchEntry> entries;
      if (bench_preset) entries = ablation_preset(base);
      for (const auto& entry : bench_configs) {
        const auto eq = entry.find('=');
        const std::string path = eq == std::string::npos ? entry : entry.substr(eq + 1);
        const std::string name = eq == std::string::npos ? std::filesystem::path(path).stem().string() : entry.substr(0, eq);
        auto cfg = train::read_config_file(path, base);
        for (const auto& [k, v] : bench_cfg.values) cfg.set(k, v);
        cfg.validate();
        entries.push_back({name, cfg});
      }
      if (entries.empty()) throw UsageError("bench needs --entry NAME=FILE or --ablation");
      data::Corpus train_set = read_corpus(bench_train, true), valid_set;
      if (bench_valid.empty()) {
        auto split = data::split_corpus(train_set, base.valid_fraction, base.seed);
        train_set = std::move(split.train);
        valid_set = std::move(split.valid);
      } else {
        valid_set = read_corpus(bench_valid, true);
      }
      auto rows = train::bench(entries, train_set, valid_set, read_corpus(bench_test, true), bench_seeds);
      std::ostringstream table;
      train::write_bench_table(rows, table);
      std::cout << table.str();
      if (!bench_out.empty()) write_text(bench_out, table.str());
    } else if (*synth_cmd) {
      synth_opt.morph = !no_morph;
      auto corpus = train::synth_corpus(synth_opt);
      if (!synth_prefix.empty()) {
        auto split = data::split_corpus(corpus, 0.1, synth_opt.seed, 0.1);
        data::write_conll_file(split.train, synth_prefix + ".train");
        data::write_conll_file(split.valid, synth_prefix + ".valid");
        data::write_conll_file(split.test, synth_prefix + ".test");
      } else {
        std::ostringstream out;
        data::serialize_conll(corpus, out);
        write_text(synth_out, out.str());
      }
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
