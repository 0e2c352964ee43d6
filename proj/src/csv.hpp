#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hlgym/errors.hpp"

namespace hlgym::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// Parses a full-field double; throws ParseError with the line number.
double parse_double(std::string_view field, std::size_t line);

// Shortest text that reads back to exactly `v`.
std::string format_exact(double v);

}  // namespace hlgym::detail
