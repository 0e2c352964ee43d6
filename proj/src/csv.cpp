#include "csv.hpp"

#include <charconv>
#include <cmath>

namespace hlgym::detail {

double parse_double(std::string_view field, std::size_t line) {
  // Tolerate a leading '+' and the unicode minus some spreadsheets export.
  std::string text(field);
  if (text.rfind("\xE2\x88\x92", 0) == 0) text.replace(0, 3, "-");
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError("not a number: '" + std::string(field) + "'", line);
  }
  return v;
}

std::string format_exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace hlgym::detail
