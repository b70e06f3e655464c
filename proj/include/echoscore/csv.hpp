#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace echoscore::csv {

// Minimal RFC 4180 support: comma separator, double-quoted fields with "" escapes.
// Fields may not span lines.
std::vector<std::string> split_line(std::string_view line);

std::string quote(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);

}  // namespace echoscore::csv
