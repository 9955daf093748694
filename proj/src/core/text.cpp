#include "core/text.hpp"

#include "core/errors.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace spsim::text {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<KeyValueLine> split_key_values(std::string_view text) {
  std::vector<KeyValueLine> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto raw = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    ++line_no;
    auto body = raw;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (!body.empty()) {
      const auto eq = body.find('=');
      if (eq == std::string_view::npos)
        throw DataError("line " + std::to_string(line_no) + " (byte " + std::to_string(pos) +
                        "): expected 'key = value'");
      const auto key = trim(body.substr(0, eq));
      if (key.empty())
        throw DataError("line " + std::to_string(line_no) + " (byte " + std::to_string(pos) +
                        "): empty key");
      out.push_back({std::string(key), std::string(trim(body.substr(eq + 1))), line_no, pos});
    }
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view origin) {
  std::map<std::string, std::string> out;
  for (auto& kv : split_key_values(text)) {
    if (!out.emplace(kv.key, kv.value).second)
      throw DataError(std::string(origin) + ": line " + std::to_string(kv.line) +
                      ": duplicate key '" + kv.key + "'");
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s == "inf" || s == "+inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (s == "nan") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_u64(std::string_view s, unsigned long long& out) {
  s = trim(s);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_i64(std::string_view s, long long& out) {
  s = trim(s);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

} // namespace spsim::text
