#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nerkit::tok {

// Word-boundary marker (U+2581) prefixed to the first piece of every word.
inline constexpr std::string_view kMarker = "\xE2\x96\x81";

struct Piece {
  std::string text;
  double log_prob = 0.0;
};

// Unigram language model over subword pieces. The bare marker is always a
// piece and is not counted by size().
class UnigramVocab {
 public:
  UnigramVocab() = default;
  // Log-probabilities are taken as given; the marker is added if missing.
  explicit UnigramVocab(std::vector<Piece> pieces);

  std::size_t size() const;
  const std::vector<Piece>& pieces() const { return pieces_; }
  bool contains(std::string_view piece) const;
  std::optional<double> log_prob(std::string_view piece) const;
  std::size_t max_piece_chars() const { return max_chars_; }
  // Score given to a single unknown character during segmentation.
  double unknown_log_prob() const { return unknown_; }
  // Sum of exp(log_prob) over all pieces.
  double total_probability() const;

  bool operator==(const UnigramVocab& other) const;

 private:
  std::vector<Piece> pieces_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t max_chars_ = 1;
  double unknown_ = -30.0;
};

struct UnigramTrainOptions {
  std::size_t vocab_size = 8000;
  std::uint64_t seed = 0;
  std::size_t max_piece_chars = 16;
  std::size_t em_rounds = 2;
  double prune_fraction = 0.2;
  // Seed candidates kept per target piece before pruning starts.
  std::size_t seed_factor = 4;
};

// Collapses whitespace runs to one space, trims, and treats a literal marker
// character as whitespace.
std::string normalize(std::string_view text);
std::vector<std::string> split_words(std::string_view text);

// Distinct characters of the normalized corpus, marker excluded.
std::size_t alphabet_size(const std::vector<std::string>& lines);

// Throws ConfigError for an empty corpus or vocab_size below the alphabet size.
UnigramVocab train_unigram(const std::vector<std::string>& lines, const UnigramTrainOptions& options);
UnigramVocab train_unigram(std::istream& corpus, const UnigramTrainOptions& options);

// Viterbi segmentation of one word; the first piece carries the marker.
std::vector<std::string> segment_word(const UnigramVocab& v, std::string_view word);
std::vector<std::string> segment(const UnigramVocab& v, std::string_view text);
// Sum of piece log-probabilities (unknown characters use the unknown score).
double segmentation_log_prob(const UnigramVocab& v, const std::vector<std::string>& pieces);
// Joins pieces and turns markers back into single spaces.
std::string detokenize(const std::vector<std::string>& pieces);
inline bool is_word_initial(std::string_view piece) { return piece.substr(0, kMarker.size()) == kMarker; }

// One "piece<TAB>log_prob" line per piece.
void save_vocab(const UnigramVocab& v, std::ostream& out);
UnigramVocab load_vocab(std::istream& in);
void save_vocab_file(const UnigramVocab& v, const std::string& path);
UnigramVocab load_vocab_file(const std::string& path);

struct AlignedSequence {
  std::vector<std::string> pieces;
  std::vector<std::size_t> word_index;
  std::vector<bool> is_word_initial;
  std::vector<std::size_t> labels;  // word tag on initial pieces, crf::kPadLabel elsewhere
};

// The first piece of each word gets the word's label; the rest are padding.
// Throws AlignmentError when the pieces do not spell out the words in order.
AlignedSequence align_labels(const std::vector<std::string>& words, const std::vector<std::size_t>& word_labels,
                             const std::vector<std::string>& pieces);
// Segments every word and aligns labels in one step.
AlignedSequence align_words(const UnigramVocab& v, const std::vector<std::string>& words,
                            const std::vector<std::size_t>& word_labels);
// Word label = label predicted for its initial piece.
std::vector<std::size_t> project_predictions(const AlignedSequence& aligned,
                                             const std::vector<std::size_t>& piece_labels);

}  // namespace nerkit::tok
