#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nerkit::utf8 {

// Splits into code points. Invalid bytes come back as single-byte strings so
// the split is total and concatenating the result reproduces the input.
std::vector<std::string> chars(std::string_view text);

std::size_t length(std::string_view text);

}  // namespace nerkit::utf8
