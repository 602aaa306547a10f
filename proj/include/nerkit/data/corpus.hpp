#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nerkit::data {

struct Token {
  std::string surface;
  std::optional<std::string> morph;  // full analysis, e.g. "de+Verb+Pos+Past+A3sg"
  std::string tag;

  bool operator==(const Token&) const = default;
};

struct LabeledSentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> surfaces() const;
  std::vector<std::string> tags() const;

  bool operator==(const LabeledSentence&) const = default;
};

using Corpus = std::vector<LabeledSentence>;

// Reads whitespace-separated CoNLL rows: "surface tag" or "surface morph tag"
// (layout fixed by the first data row; "_" marks a missing analysis). Blank
// lines end sentences; "-DOCSTART-" rows are skipped. Throws ParseError with
// the offending line number.
Corpus parse_conll(std::istream& in);
Corpus read_conll_file(const std::string& path);

// Inverse of parse_conll: three columns when any token carries an analysis.
void serialize_conll(const Corpus& corpus, std::ostream& out);
void write_conll_file(const Corpus& corpus, const std::string& path);

enum class BioMode { Strict, Repair };

// Strict: throws ValidationError at the first I-X not preceded by B-X or I-X.
// Repair: rewrites such tags to B-X.
LabeledSentence validate_bio2(const LabeledSentence& sentence, BioMode mode);
std::vector<std::string> repair_bio2(std::vector<std::string> tags);

struct CorpusSplit {
  Corpus train;
  Corpus valid;
  Corpus test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then round(n * fraction) sentences go to each held-out
// split. Each requested split receives at least one sentence.
CorpusSplit split_corpus(const Corpus& sentences, double valid_fraction, std::uint64_t seed,
                         double test_fraction = 0.0);

// Breaks sentences longer than max_len tokens. Each cut lands before the
// token closest to the limit that does not continue an entity (O or B-X), so
// entities stay whole when possible.
Corpus split_long_sentences(const Corpus& sentences, std::size_t max_len = 512);

}  // namespace nerkit::data
