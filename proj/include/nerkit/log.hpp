#pragma once

#include <iostream>
#include <string_view>

namespace nerkit {

inline void warn(std::string_view message) { std::cerr << "warning: " << message << '\n'; }

}  // namespace nerkit
