#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nerkit::crf {

// Label id for positions excluded from the loss (non-initial subword pieces).
inline constexpr std::size_t kPadLabel = static_cast<std::size_t>(-1);

// Ordered BIO2 tag inventory. Always contains "O" and, for every entity
// type, both its B- and I- tags.
class TagSet {
 public:
  TagSet();
  // Builds from observed tags: "O" first, then B-/I- pairs by entity type in
  // lexicographic order. Throws DataError on malformed tags.
  static TagSet from_tags(std::span<const std::string> tags);
  // Restores an exact ordering (artifact loading); validates the invariants.
  static TagSet from_ordered(std::vector<std::string> tags);

  std::size_t size() const { return tags_.size(); }
  std::size_t outside_id() const { return outside_; }
  bool contains(std::string_view tag) const;
  // Throws DataError for tags outside the set.
  std::size_t id(std::string_view tag) const;
  const std::string& tag(std::size_t id) const { return tags_.at(id); }
  const std::vector<std::string>& tags() const { return tags_; }

  std::vector<std::size_t> ids(std::span<const std::string> tags) const;
  std::vector<std::string> names(std::span<const std::size_t> ids) const;

  // False for BIO2 transitions that cannot occur in valid output: O->I-X,
  // B-X->I-Y, I-X->I-Y (X != Y). `from` may be `size()` for sentence start.
  bool allowed(std::size_t from, std::size_t to) const;

  bool operator==(const TagSet& other) const { return tags_ == other.tags_; }

 private:
  void index();

  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::size_t outside_ = 0;
};

}  // namespace nerkit::crf
