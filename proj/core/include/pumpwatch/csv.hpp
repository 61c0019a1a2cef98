#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pumpwatch::csv {

// Splits one CSV record on commas. Double-quoted fields may contain commas
// and doubled quotes; no embedded newlines.
std::vector<std::string> split(std::string_view line);

// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string escape(std::string_view field);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

// Strict full-string parses; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace pumpwatch::csv
