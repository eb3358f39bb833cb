#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kerbside::text {

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int64(std::string_view s);

// Shortest representation that round-trips; locale-independent.
std::string format_double(double v);

// Fixed decimals, e.g. format_fixed(0.82136, 4) == "0.8214".
std::string format_fixed(double v, int decimals);

}  // namespace kerbside::text
