#pragma once

// Small text helpers shared by the dataset loaders, the config parser, and
// the report writers: shortest-round-trip double formatting and strict
// whole-token numeric parsing with caller-supplied error context.

#include <array>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cesgad/error.hpp"

namespace cesgad {

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

// The whole token must be consumed; anything else is a malformed number.
inline double parse_double(std::string_view s, const std::string& context,
                           ErrorKind kind = ErrorKind::Data) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw Error(kind, context + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& context,
                              ErrorKind kind = ErrorKind::Data) {
  s = trim(s);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw Error(kind, context + ": '" + std::string(s) + "' is not an integer");
  }
  return v;
}

inline std::uint64_t parse_uint(std::string_view s, const std::string& context,
                                ErrorKind kind = ErrorKind::Data) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw Error(kind, context + ": '" + std::string(s) +
                          "' is not a non-negative integer");
  }
  return v;
}

inline bool parse_bool(std::string_view s, const std::string& context,
                       ErrorKind kind = ErrorKind::Config) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(kind, context + ": '" + std::string(s) +
                        "' is not a boolean (use true/false)");
}

}  // namespace cesgad
