#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spsim::text {

struct KeyValueLine {
  std::string key;
  std::string value;
  std::size_t line = 0;   // 1-based
  std::size_t offset = 0; // byte offset of the line start
};

/// Splits "key = value" lines. Blank lines and '#' comments are skipped.
/// Throws DataError naming line and byte offset when a line has no '='
/// or an empty key.
std::vector<KeyValueLine> split_key_values(std::string_view text);

/// Same, collected into a map; a repeated key is a DataError.
std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view origin);

std::string_view trim(std::string_view s);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Strict parse of the whole string; nullopt-like failure reported via bool.
bool parse_double(std::string_view s, double& out);
bool parse_u64(std::string_view s, unsigned long long& out);
bool parse_i64(std::string_view s, long long& out);

} // namespace spsim::text
