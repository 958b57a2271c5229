#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace keystone {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
/// Whole-string parse; nullopt on trailing garbage or out-of-range input.
std::optional<double> parse_double(std::string_view text);

}  // namespace keystone
