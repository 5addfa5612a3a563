#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmslu {

/// Shortest decimal form that parses back to the identical double.
std::string format_real(double value);
/// Comma-separated reals in shortest round-trip form.
std::string format_reals(std::span<const double> values, char separator = ',');

/// Strict parse of a complete decimal real; returns false on any trailing junk.
bool parse_real(std::string_view text, double& out);
bool parse_count(std::string_view text, std::size_t& out);

/// Splits on a single separator character, keeping empty fields.
std::vector<std::string_view> split(std::string_view text, char separator);
/// Splits on runs of spaces/tabs, dropping empty fields.
std::vector<std::string_view> split_whitespace(std::string_view text);

std::string to_lower(std::string_view text);

/// Reads a whole file as lines, stripping a trailing '\r' from each. Throws
/// IoError naming the path if the file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace mmslu
