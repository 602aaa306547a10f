#include <cmath>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "nerkit/crf/tagset.hpp"
#include "nerkit/error.hpp"
#include "nerkit/rng.hpp"
#include "nerkit/tokenize/unigram.hpp"
#include "nerkit/utf8.hpp"

using namespace nerkit;
using namespace nerkit::tok;

namespace {

const std::string M(kMarker);

// Best log-probability over every segmentation of `chars` into vocabulary
// pieces, by exhaustive recursion.
double best_by_enumeration(const UnigramVocab& v, const std::vector<std::string>& chars, std::size_t from) {
  if (from == chars.size()) return 0.0;
  double best = -INFINITY;
  std::string s;
  for (std::size_t j = from + 1; j <= chars.size(); ++j) {
    s += chars[j - 1];
    auto lp = v.log_prob(s);
    double score;
    if (lp)
      score = *lp;
    else if (j == from + 1)
      score = v.unknown_log_prob();
    else
      continue;
    best = std::max(best, score + best_by_enumeration(v, chars, j));
  }
  return best;
}

UnigramVocab random_small_vocab(Rng& rng) {
  const std::vector<std::string> alphabet{"a", "b", "c"};
  std::vector<std::string> texts{"a", "b", "c"};
  const std::size_t extra = rng.index(5);  // total at most 8 pieces
  while (texts.size() < 3 + extra) {
    std::string s = rng.bernoulli(0.4) ? M : "";
    const std::size_t len = 1 + rng.index(3);
    for (std::size_t i = 0; i < len; ++i) s += rng.pick(alphabet);
    if (std::find(texts.begin(), texts.end(), s) == texts.end()) texts.push_back(s);
  }
  std::vector<double> weights;
  double total = 0.0;
  for (std::size_t i = 0; i <= texts.size(); ++i) total += weights.emplace_back(rng.uniform(0.05, 1.0));
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < texts.size(); ++i) pieces.push_back({texts[i], std::log(weights[i] / total)});
  pieces.push_back({M, std::log(weights.back() / total)});
  return UnigramVocab(pieces);
}

std::string random_text(Rng& rng, const std::vector<std::string>& alphabet, std::size_t max_len) {
  std::string s;
  const std::size_t n = rng.index(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += rng.pick(alphabet);
  return s;
}

}  // namespace

TEST_CASE("normalize and detokenize") {
  CHECK(normalize("  a \t b\n\nc  ") == "a b c");
  CHECK(normalize("") == "");
  CHECK(normalize("x" + M + "y") == "x y");
  CHECK(split_words(" Ali  geldi ") == std::vector<std::string>{"Ali", "geldi"});
  CHECK(detokenize({M + "Ali", M + "gel", "di"}) == "Ali geldi");
  CHECK(detokenize({}) == "");
}

TEST_CASE("train_unigram on ababab") {
  UnigramTrainOptions opt;
  opt.vocab_size = 3;
  auto v = train_unigram(std::vector<std::string>{"ababab"}, opt);
  CHECK(v.size() == 3);
  CHECK(v.contains("a"));
  CHECK(v.contains("b"));
  CHECK(v.contains(M));
  std::string multi;
  for (const auto& p : v.pieces())
    if (p.text != M && utf8::length(p.text) > 1) multi = p.text;
  REQUIRE_FALSE(multi.empty());
  CHECK(std::exp(*v.log_prob(multi)) > 0.5);
  CHECK(std::abs(v.total_probability() - 1.0) <= 1e-6);
  // The dominant piece is used by segmentation.
  auto pieces = segment(v, "ababab");
  CHECK(detokenize(pieces) == "ababab");
  CHECK(std::find(pieces.begin(), pieces.end(), multi) != pieces.end());
}

TEST_CASE("train_unigram degenerate and error cases") {
  const std::vector<std::string> corpus{"kitap okul", "okul kitap ev", "evde kitap var"};
  UnigramTrainOptions opt;
  opt.vocab_size = alphabet_size(corpus);
  auto chars = train_unigram(corpus, opt);
  CHECK(chars.size() == opt.vocab_size);
  for (const auto& p : chars.pieces()) CHECK(utf8::length(p.text) == 1);
  CHECK(segment(chars, "ev") == std::vector<std::string>{M, "e", "v"});

  opt.vocab_size -= 1;
  CHECK_THROWS_AS(train_unigram(corpus, opt), ConfigError);
  opt.vocab_size = 10;
  CHECK_THROWS_AS(train_unigram(std::vector<std::string>{" ", ""}, opt), ConfigError);

  opt.vocab_size = 20;
  opt.seed = 5;
  auto a = train_unigram(corpus, opt);
  auto b = train_unigram(corpus, opt);
  CHECK(a == b);
  CHECK(a.size() == 20);
  CHECK(std::abs(a.total_probability() - 1.0) <= 1e-6);
}

TEST_CASE("probabilities stay normalized through pruning") {
  Rng rng(11);
  const std::vector<std::string> syll{"ka", "le", "mi", "sor", "tu", "ğı", "ün", "'da", "'nın"};
  std::vector<std::string> corpus;
  for (int i = 0; i < 200; ++i) {
    std::string line;
    for (std::size_t w = 0, n = 1 + rng.index(6); w < n; ++w) {
      for (std::size_t s = 0, k = 1 + rng.index(3); s < k; ++s) line += rng.pick(syll);
      line += ' ';
    }
    corpus.push_back(line);
  }
  for (std::size_t target : {20u, 40u, 80u}) {
    UnigramTrainOptions opt;
    opt.vocab_size = target;
    auto v = train_unigram(corpus, opt);
    CHECK(v.size() == target);
    CHECK(std::abs(v.total_probability() - 1.0) <= 1e-6);
    // Every observed character survives pruning.
    for (const auto& line : corpus)
      for (const auto& w : split_words(line))
        for (const auto& c : utf8::chars(w)) REQUIRE(v.contains(c));
    // Frequent words come out as few pieces.
    for (const auto& line : corpus) CHECK(detokenize(segment(v, line)) == normalize(line));
  }
}

TEST_CASE("segment is the maximum-likelihood segmentation") {
  Rng rng(12);
  const std::vector<std::string> alphabet{"a", "b", "c", "d"};  // d is never in the vocabulary
  for (int trial = 0; trial < 300; ++trial) {
    auto v = random_small_vocab(rng);
    REQUIRE(v.pieces().size() <= 8);
    std::string word = random_text(rng, alphabet, 7);
    if (word.empty()) word = "a";
    auto pieces = segment_word(v, word);
    auto chars = utf8::chars(M + word);
    CHECK(std::abs(segmentation_log_prob(v, pieces) - best_by_enumeration(v, chars, 0)) <= 1e-12);
    CHECK(detokenize(pieces) == word);
    CHECK(is_word_initial(pieces.front()));
  }

  // A dominant whole-word piece wins.
  UnigramVocab v({{M + "sergilenecek", std::log(0.9)}, {"s", std::log(0.05)}, {"e", std::log(0.05)}});
  CHECK(segment(v, "sergilenecek") == std::vector<std::string>{M + "sergilenecek"});
}

TEST_CASE("segment round-trips random text") {
  Rng rng(13);
  const std::vector<std::string> corpus{"Meliha Düzağaç'ın resimleri 7 Ekim'e dek sergilenecek .",
                                        "Ankara TCDD Sanat Galerisi'nde", "İstanbul'da ılık bir gün"};
  UnigramTrainOptions opt;
  opt.vocab_size = 60;
  auto v = train_unigram(corpus, opt);
  const std::vector<std::string> alphabet{"a", "e", "ı", "İ", "ğ", "'", " ", "  ", "\t", "x", "7", "Ş", "\n", "é"};
  for (int i = 0; i < 10000; ++i) {
    const std::string text = random_text(rng, alphabet, 12);
    auto pieces = segment(v, text);
    REQUIRE(detokenize(pieces) == normalize(text));
    REQUIRE(segment(v, text) == pieces);
  }
}

TEST_CASE("vocabulary file round trip") {
  UnigramTrainOptions opt;
  opt.vocab_size = 15;
  auto v = train_unigram(std::vector<std::string>{"evde ev evler", "okulda okul"}, opt);
  std::stringstream buf;
  save_vocab(v, buf);
  CHECK(buf.str().find('\t') != std::string::npos);
  auto back = load_vocab(buf);
  CHECK(back == v);
  std::istringstream bad("a\tnot-a-number\n");
  CHECK_THROWS_AS(load_vocab(bad), LoadError);
  std::istringstream notab("a 0.5\n");
  CHECK_THROWS_AS(load_vocab(notab), LoadError);
}

TEST_CASE("align_labels and project_predictions") {
  const std::size_t B = 1, I = 2, O = 0;
  auto a = align_labels({"Meliha", "Düzağaç'ın"}, {B, I}, {M + "Melih", "a", M + "Düz", "ağaç", "'ın"});
  CHECK(a.labels == std::vector<std::size_t>{B, crf::kPadLabel, I, crf::kPadLabel, crf::kPadLabel});
  CHECK(a.word_index == std::vector<std::size_t>{0, 0, 1, 1, 1});
  CHECK(a.is_word_initial == std::vector<bool>{true, false, true, false, false});
  CHECK(project_predictions(a, {B, O, I, B, B}) == std::vector<std::size_t>{B, I});

  auto single = align_labels({"Ali", "geldi"}, {B, O}, {M + "Ali", M + "geldi"});
  CHECK(single.labels == std::vector<std::size_t>{B, O});

  CHECK_THROWS_AS(align_labels({"Ali"}, {B}, {M + "Al"}), AlignmentError);
  CHECK_THROWS_AS(align_labels({"Ali"}, {B}, {"Ali"}), AlignmentError);
  CHECK_THROWS_AS(align_labels({"Ali", "x"}, {B, O}, {M + "Ali"}), AlignmentError);
  CHECK_THROWS_AS(align_labels({"Ali"}, {B}, {M + "Ali", M + "x"}), AlignmentError);
  CHECK_THROWS_AS(align_labels({"Ali"}, {B, O}, {M + "Ali"}), AlignmentError);

  // Gold piece labels project back to the word labels for any segmentation.
  Rng rng(14);
  const std::vector<std::string> corpus{"kitaplar evde", "okullardan geldi", "Ankara'da kitap"};
  UnigramTrainOptions opt;
  for (std::size_t size : {alphabet_size(corpus), std::size_t{25}, std::size_t{45}}) {
    opt.vocab_size = size;
    auto v = train_unigram(corpus, opt);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::string> words;
      std::vector<std::size_t> labels;
      for (std::size_t i = 0, n = 1 + rng.index(5); i < n; ++i) {
        words.push_back(rng.pick(std::vector<std::string>{"kitap", "evde", "Ankara'da", "geldi", "zz"}));
        labels.push_back(rng.index(5));
      }
      auto al = align_words(v, words, labels);
      std::size_t pads = 0;
      for (auto l : al.labels) pads += l == crf::kPadLabel;
      CHECK(pads == al.pieces.size() - words.size());
      std::vector<std::size_t> gold(al.pieces.size());
      for (std::size_t k = 0; k < gold.size(); ++k) gold[k] = labels[al.word_index[k]];
      CHECK(project_predictions(al, gold) == labels);
    }
  }
}
