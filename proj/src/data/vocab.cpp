#include "nerkit/data/vocab.hpp"

#include <algorithm>
#include <map>

#include "nerkit/error.hpp"
#include "nerkit/utf8.hpp"

namespace nerkit::data {

namespace {

// Count-descending, then lexicographic.
std::vector<std::string> by_frequency(const std::map<std::string, std::size_t>& counts, std::size_t min_count) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (auto& [token, count] : items) {
    if (count >= min_count) out.push_back(token);
  }
  return out;
}

}  // namespace

Vocab::Vocab() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
}

Vocab Vocab::from_ordered(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[kPad] != kPadToken || tokens[kUnk] != kUnkToken) {
    throw DataError("vocabulary must start with the reserved <pad> and <unk> entries");
  }
  Vocab v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw DataError("duplicate vocabulary entry '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  return v;
}

std::size_t Vocab::add(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

bool Vocab::contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

std::size_t Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& morph_text(const Token& token) { return token.morph ? *token.morph : token.surface; }

Vocabularies build_vocab(const Corpus& sentences, std::size_t min_count) {
  if (sentences.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> words, chars, morph_chars;
  std::vector<std::string> tags;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      ++words[t.surface];
      for (auto& c : utf8::chars(t.surface)) ++chars[c];
      for (auto& c : utf8::chars(morph_text(t))) ++morph_chars[c];
      tags.push_back(t.tag);
    }
  }
  Vocabularies v;
  for (auto& w : by_frequency(words, min_count)) v.words.add(w);
  for (auto& c : by_frequency(chars, 1)) v.chars.add(c);
  for (auto& c : by_frequency(morph_chars, 1)) v.morph_chars.add(c);
  v.tags = crf::TagSet::from_tags(tags);
  return v;
}

}  // namespace nerkit::data
