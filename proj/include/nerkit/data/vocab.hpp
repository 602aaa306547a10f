#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nerkit/crf/tagset.hpp"
#include "nerkit/data/corpus.hpp"

namespace nerkit::data {

// String <-> id map with reserved padding (0) and unknown (1) entries.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocab();
  // Restores a saved id order; the first two entries must be the reserved tokens.
  static Vocab from_ordered(std::vector<std::string> tokens);

  std::size_t add(const std::string& token);
  bool contains(std::string_view token) const;
  // kUnk when absent.
  std::size_t id(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct Vocabularies {
  Vocab words;
  Vocab chars;
  Vocab morph_chars;
  crf::TagSet tags;
};

// Frequency-ordered ids (ties broken lexicographically). Words seen fewer
// than min_count times are left out and map to unk. Morph characters come
// from the analysis, or the surface form when it is missing.
Vocabularies build_vocab(const Corpus& sentences, std::size_t min_count = 1);

// Text used by the morphological composer for a token.
const std::string& morph_text(const Token& token);

}  // namespace nerkit::data
