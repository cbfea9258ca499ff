#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mograd::csv {

/// Splits one line on commas; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Shortest decimal text that round-trips the double (%.17g fallback).
std::string format_double(double value);

/// Parses a full-string double; throws std::invalid_argument naming `what`.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

/// Reads non-empty lines; strips a UTF-8 BOM and trailing '\r'.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace mograd::csv
