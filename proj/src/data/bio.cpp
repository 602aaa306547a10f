#include "nerkit/data/bio.hpp"

namespace nerkit::data {

std::optional<ParsedTag> parse_tag(std::string_view tag) {
  if (tag == kOutside) return ParsedTag{Prefix::Outside, {}};
  if (tag.size() < 3 || tag[1] != '-') return std::nullopt;
  if (tag[0] == 'B') return ParsedTag{Prefix::Begin, std::string(tag.substr(2))};
  if (tag[0] == 'I') return ParsedTag{Prefix::Inside, std::string(tag.substr(2))};
  return std::nullopt;
}

bool is_valid_tag(std::string_view tag) { return parse_tag(tag).has_value(); }

std::string begin_tag(std::string_view type) { return "B-" + std::string(type); }

std::string inside_tag(std::string_view type) { return "I-" + std::string(type); }

}  // namespace nerkit::data
