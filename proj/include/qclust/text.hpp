#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qclust::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::string_view trim(std::string_view s);

/// Splits one CSV line on commas. Double-quoted cells may contain commas and
/// "" escapes. A trailing '\r' is ignored.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a cell only when it contains a comma, quote or newline.
std::string csv_escape(std::string_view cell);

}  // namespace qclust::text
