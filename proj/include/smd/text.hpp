#pragma once

#include <string>

namespace smd {

// Shortest decimal form that round-trips the double ('.' separator, no locale).
std::string format_double(double v);

// Fixed 17 significant digits; round-trips exactly.
std::string format_double_17(double v);

}  // namespace smd
