#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace potflare {

/// Shortest decimal text that reads back to exactly `value`.
std::string format_double(double value);

/// Parses decimal or scientific notation; the whole string must be consumed.
std::optional<double> parse_double(std::string_view text);

}  // namespace potflare
