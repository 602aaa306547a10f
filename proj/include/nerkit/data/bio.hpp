#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace nerkit::data {

enum class Prefix { Outside, Begin, Inside };

struct ParsedTag {
  Prefix prefix;
  std::string type;  // empty for O
};

// Accepts "O", "B-<type>" and "I-<type>" with a non-empty type. Case-sensitive.
std::optional<ParsedTag> parse_tag(std::string_view tag);
bool is_valid_tag(std::string_view tag);

std::string begin_tag(std::string_view type);
std::string inside_tag(std::string_view type);
inline constexpr std::string_view kOutside = "O";

}  // namespace nerkit::data
