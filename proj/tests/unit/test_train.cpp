#include <cmath>
#include <fstream>
#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "nerkit/data/corpus.hpp"
#include "nerkit/error.hpp"
#include "nerkit/train/artifact.hpp"
#include "nerkit/train/bench.hpp"
#include "nerkit/train/config.hpp"
#include "nerkit/train/optim.hpp"
#include "nerkit/train/synth.hpp"
#include "nerkit/train/trainer.hpp"

using namespace nerkit;
using namespace nerkit::train;
using ad::Tensor;

namespace {

TrainConfig tiny(ModelKind kind = ModelKind::BiLstmCrf) {
  TrainConfig c = uses_transformer(kind) ? TrainConfig::transformer_defaults(kind) : TrainConfig{};
  c.model_kind = kind;
  c.composer.word_dim = 8;
  c.composer.char_dim = 6;
  c.composer.char_hidden = 4;
  c.composer.morph_dim = 6;
  c.composer.morph_hidden = 4;
  c.composer.subword_dim = 6;
  c.composer.subword_hidden = 4;
  c.encoder_hidden = 8;
  c.transformer.hidden_units = 8;
  c.transformer.ff_units = 16;
  c.transformer.max_len = 256;
  c.tokenizer_vocab_size = 80;
  c.epochs = 2;
  c.batch_size = 4;
  if (uses_transformer(kind)) c.lr = 1e-2;
  return c;
}

data::Corpus synth(std::size_t n, std::uint64_t seed) {
  SynthOptions o;
  o.sentences = n;
  o.seed = seed;
  return synth_corpus(o);
}

double set_grads_and_norm(std::vector<Tensor>& ts, const std::vector<std::vector<double>>& gs) {
  double sq = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k)
    for (std::size_t i = 0; i < gs[k].size(); ++i) {
      ts[k].grad()[i] = gs[k][i];
      sq += gs[k][i] * gs[k][i];
    }
  return std::sqrt(sq);
}

}  // namespace

TEST_CASE("lr schedule") {
  CHECK(std::abs(lr_schedule(0.05, 1) - 0.0476190) <= 1e-6);
  CHECK(std::abs(lr_schedule(0.05, 2) - 0.0432900) <= 1e-6);
  CHECK(std::abs(lr_schedule(0.05, 3) - 0.0376435) <= 1e-6);
  CHECK(lr_schedule(0.05, 0) == 0.05);
  for (std::size_t e = 0; e < 50; ++e) CHECK(lr_schedule(0.0, e) == 0.0);
  for (std::size_t e = 1; e < 50; ++e) CHECK(lr_schedule(0.05, e) < lr_schedule(0.05, e - 1));
  CHECK(lr_decay_step(lr_schedule(0.05, 4), 5) == lr_schedule(0.05, 5));
  CHECK_THROWS_AS(lr_decay_step(0.05, 0), UsageError);
}

TEST_CASE("clip_gradients") {
  std::vector<Tensor> one{Tensor::zeros({2}, true)};
  set_grads_and_norm(one, {{0.6, 0.8}});
  CHECK(clip_gradients(one, 0.5) == doctest::Approx(1.0));
  CHECK(one[0].grad()[0] == doctest::Approx(0.3));
  CHECK(one[0].grad()[1] == doctest::Approx(0.4));

  set_grads_and_norm(one, {{0.03, 0.04}});
  clip_gradients(one, 0.5);
  CHECK(one[0].grad()[0] == 0.03);
  CHECK(one[0].grad()[1] == 0.04);

  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Tensor> ts{Tensor::zeros({3}, true), Tensor::zeros({2, 2}, true)};
    std::vector<std::vector<double>> gs{std::vector<double>(3), std::vector<double>(4)};
    for (auto& g : gs)
      for (double& v : g) v = rng.uniform(-5, 5);
    set_grads_and_norm(ts, gs);
    const double clip = rng.uniform(0.01, 10);
    clip_gradients(ts, clip);
    CHECK(global_grad_norm(ts) <= clip + 1e-12);
  }
  CHECK_THROWS_AS(clip_gradients(one, 0.0), ConfigError);
}

TEST_CASE("sgd with momentum") {
  Tensor p = Tensor::vector({1.0, -2.0}, true);
  SgdMomentum opt({p}, 0.9);
  p.grad()[0] = 1.0;
  p.grad()[1] = -1.0;
  opt.step(0.1);
  p.zero_grad();
  const double v0 = opt.velocity()[0][0];
  const double before = p[0];
  opt.step(0.1);
  CHECK(opt.velocity()[0][0] == doctest::Approx(0.9 * v0));
  CHECK(p[0] == doctest::Approx(before - 0.1 * 0.9 * v0));

  Tensor q = Tensor::vector({1.0}, true);
  SgdMomentum plain({q}, 0.0);
  q.grad()[0] = 2.0;
  plain.step(0.5);
  CHECK(q[0] == 0.0);

  Tensor z = Tensor::vector({0.0}, true);
  SgdMomentum mom({z}, 0.9);
  z.grad()[0] = 3.0;
  mom.step(0.01);
  mom.step(0.01);
  CHECK(z[0] == doctest::Approx(-0.01 * 3.0 * (1.0 + 1.9)).epsilon(1e-14));

  Tensor still = Tensor::vector({4.0, 5.0}, true);
  SgdMomentum none({still}, 0.9);
  none.step(1.0);
  CHECK(still[0] == 4.0);
  CHECK(still[1] == 5.0);
}

TEST_CASE("adam with decoupled weight decay") {
  Tensor p = Tensor::vector({1.0, -2.0, 0.5}, true);
  AdamW zero({p}, 0.9, 0.999, 1e-8, 0.0);
  zero.step(0.1);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -2.0);

  Tensor q = Tensor::vector({1.0, -2.0, 0.5}, true);
  AdamW first({q}, 0.9, 0.999, 1e-8, 0.0);
  q.grad()[0] = 0.3;
  q.grad()[1] = -7.0;
  q.grad()[2] = 1e-3;
  first.step(1e-3);
  CHECK(q[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-7));
  CHECK(q[1] == doctest::Approx(-2.0 + 1e-3).epsilon(1e-7));
  CHECK(q[2] == doctest::Approx(0.5 - 1e-3).epsilon(1e-6));

  // Scalar oracle over 10 steps with changing gradients.
  Rng rng(2);
  const double lr = 5e-3, b1 = 0.85, b2 = 0.99, eps = 1e-6, wd = 0.05;
  Tensor r = Tensor::vector({0.7, -0.3}, true);
  AdamW opt({r}, b1, b2, eps, wd);
  double x[2] = {0.7, -0.3}, m[2] = {0, 0}, v[2] = {0, 0};
  for (int t = 1; t <= 10; ++t) {
    for (int i = 0; i < 2; ++i) r.grad()[i] = rng.uniform(-1, 1);
    for (int i = 0; i < 2; ++i) {
      const double g = r.grad()[i];
      x[i] = x[i] * (1 - lr * wd);
      m[i] = b1 * m[i] + (1 - b1) * g;
      v[i] = b2 * v[i] + (1 - b2) * g * g;
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      x[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
    opt.step(lr);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(r[i] - x[i]) <= 1e-12);
  }
}

TEST_CASE("config text") {
  TrainConfig c;
  CHECK(c.lr == 0.05);
  CHECK(c.momentum == 0.9);
  CHECK(c.clip_norm == 0.5);
  CHECK(c.dropout_p == 0.5);
  CHECK(c.composer.word_dim == 300);
  std::istringstream in("# comment\nmodel_kind = bilstm-linear\nlr=0.01  # inline\nuse_morph = true\nepochs = 50\n");
  TrainConfig parsed = parse_config(in);
  CHECK(parsed.model_kind == ModelKind::BiLstmLinear);
  CHECK(parsed.lr == 0.01);
  CHECK(parsed.composer.use_morph);
  CHECK(parsed.epochs == 50);

  std::istringstream back(config_text(parsed));
  CHECK(config_text(parse_config(back)) == config_text(parsed));
  for (const auto& key : config_keys()) CHECK_NOTHROW(parsed.set(key, parsed.get(key)));

  std::istringstream unknown("nope = 1\n");
  CHECK_THROWS_AS(parse_config(unknown), ConfigError);
  std::istringstream bad("lr = fast\n");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  TrainConfig invalid;
  invalid.lr = 0.0;
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
  invalid = {};
  invalid.dropout_p = 1.0;
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
  invalid = {};
  invalid.epochs = 0;
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
  auto t = TrainConfig::transformer_defaults();
  CHECK(t.lr == 5e-5);
  CHECK(t.clip_norm == 1.0);
  CHECK(t.optimizer == OptimizerKind::AdamDecoupled);
}

TEST_CASE("synthetic corpus") {
  auto a = synth(300, 4);
  CHECK(a.size() == 300);
  CHECK(a == synth(300, 4));
  CHECK_FALSE(a == synth(300, 5));
  std::set<std::string> types;
  for (const auto& s : a) {
    CHECK_NOTHROW(data::validate_bio2(s, data::BioMode::Strict));
    for (const auto& t : s.tokens) {
      CHECK(t.morph.has_value());
      if (t.tag != "O") types.insert(t.tag.substr(2));
    }
  }
  CHECK(types == std::set<std::string>{"LOCATION", "ORGANIZATION", "PERSON"});
  SynthOptions two;
  two.sentences = 5;
  two.morph = false;
  for (const auto& s : synth_corpus(two))
    for (const auto& t : s.tokens) CHECK_FALSE(t.morph.has_value());
}

TEST_CASE("one epoch on one sentence lowers the loss") {
  auto corpus = synth(1, 3);
  for (auto kind : {ModelKind::BiLstmCrf, ModelKind::BiLstmLinear, ModelKind::TransformerCrf,
                    ModelKind::TransformerLinear}) {
    TrainConfig c = tiny(kind);
    c.epochs = 1;
    c.dropout_p = 0.0;
    c.transformer.dropout_p = 0.0;
    c.lambda_l2 = 0.0;
    Rng rng(c.seed);
    Tagger before = Tagger::create(c, corpus, rng);
    ad::Graph g0(false);
    Rng unused(0);
    const double initial = before.loss(g0, corpus[0], false, unused).item();
    auto result = train_tagger(c, corpus, corpus);
    ad::Graph g1(false);
    const double after = result.model.loss(g1, corpus[0], false, unused).item();
    CHECK_MESSAGE(after < initial, to_string(kind));
  }
}

TEST_CASE("training is deterministic and keeps the best epoch") {
  auto corpus = synth(40, 5);
  auto split = data::split_corpus(corpus, 0.25, 1);
  TrainConfig c = tiny();
  c.epochs = 4;
  auto a = train_tagger(c, split.train, split.valid);
  auto b = train_tagger(c, split.train, split.valid);
  REQUIRE(a.log.size() == 4);
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(format_metrics(a.log[i]) == format_metrics(b.log[i]));
  std::size_t best = 0;
  for (std::size_t i = 0; i < a.log.size(); ++i)
    if (a.log[i].valid_f1 > a.log[best].valid_f1) best = i;
  CHECK(a.best_epoch == best + 1);
  CHECK(a.best_f1 == a.log[best].valid_f1);
  CHECK(evaluate(a.model, split.valid).f1 == a.best_f1);
  // LR decays by the recurrence between epochs.
  CHECK(a.log[1].lr == lr_decay_step(a.log[0].lr, 1));

  auto line = format_metrics(a.log[0]);
  CHECK(std::count(line.begin(), line.end(), '\t') == 5);
}

TEST_CASE("overfitting one sentence reproduces its tags") {
  auto corpus = synth(1, 11);
  for (auto kind : {ModelKind::BiLstmCrf, ModelKind::BiLstmLinear, ModelKind::TransformerCrf,
                    ModelKind::TransformerLinear}) {
    TrainConfig c = tiny(kind);
    c.epochs = uses_transformer(kind) ? 40 : 150;
    c.lr_decay = false;
    c.dropout_p = 0.0;
    c.transformer.dropout_p = 0.0;
    c.lr = uses_transformer(kind) ? 1e-2 : 0.05;
    auto result = train_tagger(c, corpus, corpus);
    CHECK_MESSAGE(result.model.predict(corpus[0]) == corpus[0].tags(), to_string(kind));
    CHECK(result.model.predict(std::vector<std::string>{}).empty());
  }
}

TEST_CASE("masked CRF output is valid BIO2") {
  auto corpus = synth(30, 12);
  TrainConfig c = tiny();
  c.epochs = 1;
  auto result = train_tagger(c, corpus, corpus);
  Rng rng(3);
  const std::vector<std::string> words{"Ali", "geldi", "Ankara'da", "TCDD", "Holding", ".", "xyz", "Kaya"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> sentence;
    for (std::size_t i = 0, n = 1 + rng.index(10); i < n; ++i) sentence.push_back(rng.pick(words));
    data::LabeledSentence s;
    for (const auto& tag : result.model.predict(sentence)) s.tokens.push_back({"w", std::nullopt, tag});
    CHECK_NOTHROW(data::validate_bio2(s, data::BioMode::Strict));
  }
}

TEST_CASE("artifact round trip") {
  auto corpus = synth(30, 13);
  for (auto kind : {ModelKind::BiLstmCrf, ModelKind::BiLstmLinear, ModelKind::TransformerCrf,
                    ModelKind::TransformerLinear}) {
    TrainConfig c = tiny(kind);
    c.epochs = 1;
    if (kind == ModelKind::BiLstmCrf) {
      c.composer.use_morph = true;
      c.composer.use_subword = true;
    }
    auto result = train_tagger(c, corpus, corpus);
    std::stringstream buf;
    save_tagger(result.model, buf);
    const std::string bytes = buf.str();
    Tagger loaded = load_tagger(buf);
    CHECK(config_text(loaded.config()) == config_text(result.model.config()));
    auto before = result.model.parameters();
    auto after = loaded.parameters();
    REQUIRE(before.size() == after.size());
    for (std::size_t k = 0; k < before.size(); ++k) {
      CHECK(before[k].name == after[k].name);
      REQUIRE(std::equal(before[k].tensor.values().begin(), before[k].tensor.values().end(),
                         after[k].tensor.values().begin()));
    }
    for (const auto& s : corpus) CHECK(loaded.predict(s) == result.model.predict(s));

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    std::istringstream m(bad_magic);
    CHECK_THROWS_AS(load_tagger(m), LoadError);
    std::string bad_version = bytes;
    bad_version[8] = 9;
    std::istringstream v(bad_version);
    try {
      load_tagger(v);
      FAIL("expected a load error");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("version 9") != std::string::npos);
    }
    std::istringstream cut(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_tagger(cut), LoadError);
  }
}

TEST_CASE("divergence is reported") {
  auto corpus = synth(5, 14);
  const std::string path = "nerkit_test_inf_embeddings.txt";
  {
    std::ofstream out(path);
    for (const auto& s : corpus)
      for (const auto& t : s.tokens) {
        out << t.surface;
        for (int k = 0; k < 8; ++k) out << " inf";
        out << '\n';
      }
  }
  TrainConfig c = tiny();
  c.pretrained_embeddings = path;
  c.epochs = 1;
  CHECK_THROWS_AS(train_tagger(c, corpus, corpus), DivergenceError);
  std::remove(path.c_str());
}

TEST_CASE("bench harness") {
  auto corpus = synth(40, 15);
  auto split = data::split_corpus(corpus, 0.2, 1, 0.2);
  TrainConfig c = tiny();
  c.epochs = 1;
  auto rows = bench({{"a", c}, {"b", c}}, split.train, split.valid, split.test);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].runs.size() == 5);
  CHECK(rows[0].mean_f1 == rows[1].mean_f1);
  for (std::size_t i = 0; i < 5; ++i) CHECK(rows[0].runs[i].test.f1 == rows[1].runs[i].test.f1);
  double sum = 0.0;
  for (const auto& r : rows[0].runs) sum += r.test.f1;
  CHECK(rows[0].mean_f1 == doctest::Approx(sum / 5));
  std::ostringstream table;
  write_bench_table(rows, table);
  CHECK(table.str().find("5:") != std::string::npos);
  CHECK_THROWS_AS(bench({}, split.train, split.valid, split.test), ConfigError);
}
