#include "nerkit/tokenize/unigram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "nerkit/crf/tagset.hpp"
#include "nerkit/error.hpp"
#include "nerkit/utf8.hpp"

namespace nerkit::tok {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kUnknownPenalty = 10.0;
constexpr double kCountFloor = 1e-6;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

bool is_space(const std::string& ch) {
  return ch == " " || ch == "\t" || ch == "\n" || ch == "\r" || ch == "\f" || ch == "\v" || ch == kMarker;
}

std::vector<std::string> marked_chars(std::string_view word) {
  std::vector<std::string> out{std::string(kMarker)};
  for (auto& c : utf8::chars(word)) out.push_back(std::move(c));
  return out;
}

std::string join(const std::vector<std::string>& chars, std::size_t begin, std::size_t end) {
  std::string s;
  for (std::size_t i = begin; i < end; ++i) s += chars[i];
  return s;
}

}  // namespace

// ---- vocabulary -----------------------------------------------------------

UnigramVocab::UnigramVocab(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  bool has_marker = false;
  for (const auto& p : pieces_) has_marker |= p.text == kMarker;
  if (!has_marker) pieces_.push_back({std::string(kMarker), kNegInf});
  double lowest = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].text.empty()) throw DataError("empty piece in unigram vocabulary");
    if (!index_.emplace(pieces_[i].text, i).second) throw DataError("duplicate piece: " + pieces_[i].text);
    max_chars_ = std::max(max_chars_, utf8::length(pieces_[i].text));
    if (std::isfinite(pieces_[i].log_prob)) lowest = std::min(lowest, pieces_[i].log_prob);
  }
  unknown_ = lowest - kUnknownPenalty;
}

std::size_t UnigramVocab::size() const { return pieces_.size() - 1; }

bool UnigramVocab::contains(std::string_view piece) const { return index_.count(std::string(piece)) > 0; }

std::optional<double> UnigramVocab::log_prob(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return pieces_[it->second].log_prob;
}

double UnigramVocab::total_probability() const {
  double s = 0.0;
  for (const auto& p : pieces_) s += std::exp(p.log_prob);
  return s;
}

bool UnigramVocab::operator==(const UnigramVocab& other) const {
  if (pieces_.size() != other.pieces_.size()) return false;
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    if (pieces_[i].text != other.pieces_[i].text || pieces_[i].log_prob != other.pieces_[i].log_prob) return false;
  return true;
}

// ---- normalization --------------------------------------------------------

std::string normalize(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (const auto& ch : utf8::chars(text)) {
    if (is_space(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += ch;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string norm = normalize(text);
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    words.push_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

std::size_t alphabet_size(const std::vector<std::string>& lines) {
  std::set<std::string> chars;
  for (const auto& line : lines)
    for (const auto& w : split_words(line))
      for (auto& c : utf8::chars(w)) chars.insert(std::move(c));
  return chars.size();
}

// ---- segmentation ---------------------------------------------------------

namespace {

struct Lattice {
  std::vector<double> best;
  std::vector<std::size_t> back;  // start index of the last piece
};

// Viterbi over chars; `skip_full` forbids the single piece spanning everything.
Lattice viterbi(const UnigramVocab& v, const std::vector<std::string>& chars, bool skip_full = false) {
  const std::size_t n = chars.size();
  Lattice l{std::vector<double>(n + 1, kNegInf), std::vector<std::size_t>(n + 1, 0)};
  l.best[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (l.best[i] == kNegInf) continue;
    std::string s;
    for (std::size_t j = i + 1; j <= n && j - i <= v.max_piece_chars(); ++j) {
      s += chars[j - 1];
      if (skip_full && i == 0 && j == n) continue;
      auto lp = v.log_prob(s);
      double score;
      if (lp && std::isfinite(*lp))
        score = *lp;
      else if (j == i + 1)
        score = v.unknown_log_prob();
      else
        continue;
      const double cand = l.best[i] + score;
      if (cand > l.best[j]) {
        l.best[j] = cand;
        l.back[j] = i;
      }
    }
  }
  return l;
}

std::vector<std::string> backtrack(const Lattice& l, const std::vector<std::string>& chars) {
  std::vector<std::string> out;
  std::size_t j = chars.size();
  while (j > 0) {
    const std::size_t i = l.back[j];
    out.push_back(join(chars, i, j));
    j = i;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::string> segment_word(const UnigramVocab& v, std::string_view word) {
  auto chars = marked_chars(word);
  return backtrack(viterbi(v, chars), chars);
}

std::vector<std::string> segment(const UnigramVocab& v, std::string_view text) {
  std::vector<std::string> out;
  for (const auto& w : split_words(text)) {
    auto pieces = segment_word(v, w);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

double segmentation_log_prob(const UnigramVocab& v, const std::vector<std::string>& pieces) {
  double s = 0.0;
  for (const auto& p : pieces) {
    auto lp = v.log_prob(p);
    s += (lp && std::isfinite(*lp)) ? *lp : v.unknown_log_prob();
  }
  return s;
}

std::string detokenize(const std::vector<std::string>& pieces) {
  std::string joined;
  for (const auto& p : pieces) joined += p;
  std::string out;
  std::size_t pos = 0;
  while (pos < joined.size()) {
    if (joined.compare(pos, kMarker.size(), kMarker) == 0) {
      if (!out.empty()) out += ' ';
      pos += kMarker.size();
    } else {
      out += joined[pos++];
    }
  }
  return out;
}

// ---- training -------------------------------------------------------------

namespace {

struct WordType {
  std::vector<std::string> chars;  // marker first
  double freq = 0.0;
};

struct Edge {
  std::size_t begin, end, piece;
};

class Trainer {
 public:
  Trainer(std::vector<WordType> words, const UnigramTrainOptions& opt) : words_(std::move(words)), opt_(opt) {}

  UnigramVocab run() {
    seed();
    while (true) {
      for (std::size_t r = 0; r < opt_.em_rounds; ++r) em_step();
      if (current_size() <= opt_.vocab_size) break;
      prune();
    }
    std::vector<Piece> out;
    for (std::size_t i = 0; i < texts_.size(); ++i) out.push_back({texts_[i], logp_[i]});
    std::stable_sort(out.begin(), out.end(), [](const Piece& a, const Piece& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      return a.text < b.text;
    });
    return UnigramVocab(std::move(out));
  }

 private:
  std::vector<WordType> words_;
  UnigramTrainOptions opt_;
  std::vector<std::string> texts_;
  std::vector<double> logp_;
  std::vector<bool> required_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Edge>> edges_;

  std::size_t current_size() const { return texts_.size() - 1; }

  void seed() {
    std::map<std::string, double> singles;
    std::map<std::string, double> multi;
    for (const auto& w : words_) {
      const std::size_t n = w.chars.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) singles[w.chars[i]] += w.freq;
        std::string s = w.chars[i];
        for (std::size_t j = i + 2; j <= n && j - i <= opt_.max_piece_chars; ++j) {
          s += w.chars[j - 1];
          multi[s] += w.freq;
        }
      }
    }
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [s, f] : multi) ranked.push_back({f * static_cast<double>(utf8::length(s)), s});
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t keep = std::min(ranked.size(), opt_.seed_factor * opt_.vocab_size);

    double marker_freq = 0.0;
    for (const auto& w : words_) marker_freq += w.freq;
    add(std::string(kMarker), marker_freq, true);
    for (const auto& [s, f] : singles) add(s, f, true);
    for (std::size_t i = 0; i < keep; ++i) add(ranked[i].second, ranked[i].first, false);
    normalize_logs();
  }

  void add(const std::string& text, double score, bool required) {
    index_.emplace(text, texts_.size());
    texts_.push_back(text);
    logp_.push_back(std::log(score));
    required_.push_back(required);
  }

  void normalize_logs() {
    double z = kNegInf;
    for (double lp : logp_) z = log_add(z, lp);
    for (double& lp : logp_) lp -= z;
  }

  void rebuild_edges() {
    edges_.assign(words_.size(), {});
    for (std::size_t w = 0; w < words_.size(); ++w) {
      const auto& chars = words_[w].chars;
      for (std::size_t i = 0; i < chars.size(); ++i) {
        std::string s;
        for (std::size_t j = i + 1; j <= chars.size() && j - i <= opt_.max_piece_chars; ++j) {
          s += chars[j - 1];
          auto it = index_.find(s);
          if (it != index_.end()) edges_[w].push_back({i, j, it->second});
        }
      }
    }
  }

  void em_step() {
    rebuild_edges();
    std::vector<double> counts(texts_.size(), 0.0);
    for (std::size_t w = 0; w < words_.size(); ++w) {
      const std::size_t n = words_[w].chars.size();
      std::vector<double> alpha(n + 1, kNegInf), beta(n + 1, kNegInf);
      alpha[0] = 0.0;
      for (const auto& e : edges_[w]) alpha[e.end] = log_add(alpha[e.end], alpha[e.begin] + logp_[e.piece]);
      beta[n] = 0.0;
      for (auto it = edges_[w].rbegin(); it != edges_[w].rend(); ++it)
        beta[it->begin] = log_add(beta[it->begin], logp_[it->piece] + beta[it->end]);
      const double z = alpha[n];
      for (const auto& e : edges_[w])
        counts[e.piece] += words_[w].freq * std::exp(alpha[e.begin] + logp_[e.piece] + beta[e.end] - z);
    }
    double total = 0.0;
    for (double& c : counts) total += (c += kCountFloor);
    for (std::size_t i = 0; i < counts.size(); ++i) logp_[i] = std::log(counts[i] / total);
  }

  void prune() {
    UnigramVocab current = snapshot();
    std::vector<double> freq(texts_.size(), 0.0);
    for (const auto& w : words_) {
      for (const auto& p : backtrack(viterbi(current, w.chars), w.chars)) {
        auto it = index_.find(p);
        if (it != index_.end()) freq[it->second] += w.freq;
      }
    }
    std::vector<std::pair<double, std::size_t>> losses;
    for (std::size_t i = 0; i < texts_.size(); ++i) {
      if (required_[i]) continue;
      double loss = 0.0;
      if (freq[i] > 0.0) {
        auto chars = utf8::chars(texts_[i]);
        auto alt = viterbi(current, chars, true);
        loss = freq[i] * (logp_[i] - alt.best.back());
      }
      losses.push_back({loss, i});
    }
    std::stable_sort(losses.begin(), losses.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return texts_[a.second] < texts_[b.second];
    });
    std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(opt_.prune_fraction * losses.size()));
    k = std::min({k, losses.size(), current_size() - opt_.vocab_size});
    std::vector<bool> drop(texts_.size(), false);
    for (std::size_t i = 0; i < k; ++i) drop[losses[i].second] = true;

    std::vector<std::string> texts;
    std::vector<double> logp;
    std::vector<bool> required;
    index_.clear();
    for (std::size_t i = 0; i < texts_.size(); ++i) {
      if (drop[i]) continue;
      index_.emplace(texts_[i], texts.size());
      texts.push_back(texts_[i]);
      logp.push_back(logp_[i]);
      required.push_back(required_[i]);
    }
    texts_ = std::move(texts);
    logp_ = std::move(logp);
    required_ = std::move(required);
    normalize_logs();
  }

  UnigramVocab snapshot() const {
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < texts_.size(); ++i) pieces.push_back({texts_[i], logp_[i]});
    return UnigramVocab(std::move(pieces));
  }
};

}  // namespace

UnigramVocab train_unigram(const std::vector<std::string>& lines, const UnigramTrainOptions& options) {
  if (options.max_piece_chars == 0) throw ConfigError("max_piece_chars must be positive");
  if (!(options.prune_fraction > 0.0 && options.prune_fraction < 1.0))
    throw ConfigError("prune_fraction must be in (0, 1)");
  std::map<std::string, double> freq;
  for (const auto& line : lines)
    for (const auto& w : split_words(line)) freq[w] += 1.0;
  if (freq.empty()) throw ConfigError("tokenizer training corpus is empty");
  const std::size_t alphabet = alphabet_size(lines);
  if (options.vocab_size < alphabet)
    throw ConfigError("vocab_size " + std::to_string(options.vocab_size) + " is below the alphabet size " +
                      std::to_string(alphabet));
  std::vector<WordType> words;
  for (const auto& [w, f] : freq) words.push_back({marked_chars(w), f});
  return Trainer(std::move(words), options).run();
}

UnigramVocab train_unigram(std::istream& corpus, const UnigramTrainOptions& options) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(corpus, line)) lines.push_back(line);
  return train_unigram(lines, options);
}

// ---- persistence ----------------------------------------------------------

void save_vocab(const UnigramVocab& v, std::ostream& out) {
  std::ostringstream buf;
  buf.precision(17);
  for (const auto& p : v.pieces()) buf << p.text << '\t' << p.log_prob << '\n';
  out << buf.str();
}

UnigramVocab load_vocab(std::istream& in) {
  std::vector<Piece> pieces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0)
      throw LoadError("tokenizer vocabulary line " + std::to_string(line_no) + ": expected piece<TAB>log_prob");
    double lp;
    const std::string num = line.substr(tab + 1);
    if (num == "-inf") {
      lp = kNegInf;
    } else {
      try {
        std::size_t used = 0;
        lp = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(num);
      } catch (const std::exception&) {
        throw LoadError("tokenizer vocabulary line " + std::to_string(line_no) + ": bad log-probability '" + num + "'");
      }
    }
    pieces.push_back({line.substr(0, tab), lp});
  }
  if (pieces.empty()) throw LoadError("tokenizer vocabulary is empty");
  return UnigramVocab(std::move(pieces));
}

void save_vocab_file(const UnigramVocab& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write tokenizer vocabulary: " + path);
  save_vocab(v, out);
}

UnigramVocab load_vocab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open tokenizer vocabulary: " + path);
  return load_vocab(in);
}

// ---- label alignment ------------------------------------------------------

AlignedSequence align_labels(const std::vector<std::string>& words, const std::vector<std::size_t>& word_labels,
                             const std::vector<std::string>& pieces) {
  if (words.size() != word_labels.size())
    throw AlignmentError(std::to_string(words.size()) + " words but " + std::to_string(word_labels.size()) +
                         " labels");
  AlignedSequence out;
  std::size_t w = 0;
  std::string built;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const std::string& p = pieces[k];
    const bool initial = is_word_initial(p);
    if (initial) {
      if (k > 0) {
        if (built != words[w])
          throw AlignmentError("pieces spell '" + built + "' where word " + std::to_string(w) + " is '" + words[w] +
                               "'");
        ++w;
      }
      if (w >= words.size()) throw AlignmentError("more word-initial pieces than words");
      built = p.substr(kMarker.size());
    } else {
      if (k == 0) throw AlignmentError("first piece '" + p + "' is not word-initial");
      built += p;
    }
    out.pieces.push_back(p);
    out.word_index.push_back(w);
    out.is_word_initial.push_back(initial);
    out.labels.push_back(initial ? word_labels[w] : crf::kPadLabel);
  }
  if (words.empty() && pieces.empty()) return out;
  if (pieces.empty() || w + 1 != words.size() || built != words[w])
    throw AlignmentError("pieces do not cover all " + std::to_string(words.size()) + " words");
  return out;
}

AlignedSequence align_words(const UnigramVocab& v, const std::vector<std::string>& words,
                            const std::vector<std::size_t>& word_labels) {
  std::vector<std::string> pieces;
  for (const auto& w : words) {
    auto p = segment_word(v, w);
    pieces.insert(pieces.end(), p.begin(), p.end());
  }
  return align_labels(words, word_labels, pieces);
}

std::vector<std::size_t> project_predictions(const AlignedSequence& aligned,
                                             const std::vector<std::size_t>& piece_labels) {
  if (piece_labels.size() != aligned.pieces.size())
    throw UsageError("expected " + std::to_string(aligned.pieces.size()) + " piece predictions, got " +
                     std::to_string(piece_labels.size()));
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < piece_labels.size(); ++k)
    if (aligned.is_word_initial[k]) out.push_back(piece_labels[k]);
  return out;
}

}  // namespace nerkit::tok
