#include "nerkit/data/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "nerkit/data/bio.hpp"
#include "nerkit/error.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::data {

namespace {

constexpr std::string_view kMissingMorph = "_";

std::vector<std::string> split_columns(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> cols;
  for (std::string col; in >> col;) cols.push_back(std::move(col));
  return cols;
}

}  // namespace

std::vector<std::string> LabeledSentence::surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::vector<std::string> LabeledSentence::tags() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.tag);
  return out;
}

Corpus parse_conll(std::istream& in) {
  Corpus corpus;
  LabeledSentence current;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto cols = split_columns(line);
    if (cols.empty()) {
      if (!current.tokens.empty()) corpus.push_back(std::move(current));
      current = {};
      continue;
    }
    if (cols[0] == "-DOCSTART-") continue;
    if (cols.size() < 2) throw ParseError("expected at least 2 columns, got 1", line_no);
    if (cols.size() > 3) throw ParseError("expected 2 or 3 columns, got " + std::to_string(cols.size()), line_no);
    if (columns == 0) columns = cols.size();
    if (cols.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " columns as in the first row, got " +
                           std::to_string(cols.size()),
                       line_no);
    }
    if (!is_valid_tag(cols.back())) throw ParseError("unknown tag '" + cols.back() + "'", line_no);
    Token token;
    token.surface = cols[0];
    if (columns == 3 && cols[1] != kMissingMorph) token.morph = cols[1];
    token.tag = cols.back();
    current.tokens.push_back(std::move(token));
  }
  if (!current.tokens.empty()) corpus.push_back(std::move(current));
  return corpus;
}

Corpus read_conll_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  return parse_conll(in);
}

void serialize_conll(const Corpus& corpus, std::ostream& out) {
  bool with_morph = false;
  for (const auto& s : corpus)
    for (const auto& t : s.tokens) with_morph = with_morph || t.morph.has_value();
  for (const auto& s : corpus) {
    for (const auto& t : s.tokens) {
      out << t.surface << ' ';
      if (with_morph) out << (t.morph ? *t.morph : std::string(kMissingMorph)) << ' ';
      out << t.tag << '\n';
    }
    out << '\n';
  }
}

void write_conll_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  serialize_conll(corpus, out);
}

std::vector<std::string> repair_bio2(std::vector<std::string> tags) {
  std::string open_type;
  bool inside = false;
  for (auto& tag : tags) {
    auto parsed = parse_tag(tag);
    if (!parsed) throw DataError("malformed BIO2 tag '" + tag + "'");
    if (parsed->prefix == Prefix::Inside && (!inside || parsed->type != open_type)) {
      tag = begin_tag(parsed->type);
      parsed->prefix = Prefix::Begin;
    }
    inside = parsed->prefix != Prefix::Outside;
    open_type = parsed->type;
  }
  return tags;
}

LabeledSentence validate_bio2(const LabeledSentence& sentence, BioMode mode) {
  if (mode == BioMode::Repair) {
    LabeledSentence out = sentence;
    auto repaired = repair_bio2(sentence.tags());
    for (std::size_t i = 0; i < out.tokens.size(); ++i) out.tokens[i].tag = std::move(repaired[i]);
    return out;
  }
  std::string open_type;
  bool inside = false;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    auto parsed = parse_tag(sentence.tokens[i].tag);
    if (!parsed) throw ValidationError("malformed tag '" + sentence.tokens[i].tag + "'", i);
    if (parsed->prefix == Prefix::Inside) {
      if (!inside) throw ValidationError("'" + sentence.tokens[i].tag + "' does not continue an entity", i);
      if (parsed->type != open_type) {
        throw ValidationError("'" + sentence.tokens[i].tag + "' switches type inside " + open_type, i);
      }
    }
    inside = parsed->prefix != Prefix::Outside;
    open_type = parsed->type;
  }
  return sentence;
}

CorpusSplit split_corpus(const Corpus& sentences, double valid_fraction, std::uint64_t seed, double test_fraction) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw ConfigError("valid fraction must lie in (0, 1), got " + std::to_string(valid_fraction));
  }
  if (!(test_fraction >= 0.0 && valid_fraction + test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in [0, 1 - valid fraction), got " + std::to_string(test_fraction));
  }
  const std::size_t n = sentences.size();
  const std::size_t held_splits = test_fraction > 0.0 ? 2 : 1;
  if (n < held_splits + 1) throw ConfigError("need at least " + std::to_string(held_splits + 1) + " sentences to split");

  auto count_for = [n](double fraction) {
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::max<std::size_t>(k, 1);
  };
  std::size_t n_valid = count_for(valid_fraction);
  std::size_t n_test = test_fraction > 0.0 ? count_for(test_fraction) : 0;
  while (n_valid + n_test >= n) {
    if (n_valid >= n_test && n_valid > 1) {
      --n_valid;
    } else {
      --n_test;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  CorpusSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = sentences[order[i]];
    if (i < n_valid) {
      split.valid.push_back(s);
    } else if (i < n_valid + n_test) {
      split.test.push_back(s);
    } else {
      split.train.push_back(s);
    }
  }
  return split;
}

Corpus split_long_sentences(const Corpus& sentences, std::size_t max_len) {
  if (max_len == 0) throw ConfigError("max sentence length must be positive");
  Corpus out;
  for (const auto& s : sentences) {
    std::size_t begin = 0;
    while (s.tokens.size() - begin > max_len) {
      std::size_t cut = begin + max_len;
      for (std::size_t c = begin + max_len; c > begin; --c) {
        if (parse_tag(s.tokens[c].tag)->prefix != Prefix::Inside) {
          cut = c;
          break;
        }
      }
      out.push_back({{s.tokens.begin() + begin, s.tokens.begin() + cut}});
      begin = cut;
    }
    out.push_back({{s.tokens.begin() + begin, s.tokens.end()}});
  }
  return out;
}

}  // namespace nerkit::data
