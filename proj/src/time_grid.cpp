#include "hlgym/time_grid.hpp"

#include <cctype>
#include <cstdio>

#include "hlgym/errors.hpp"

namespace hlgym {

namespace {

using std::chrono::days;
using std::chrono::seconds;

bool all_digits(std::string_view s) {
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return !s.empty();
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

TimeGrid::TimeGrid(Timestamp start, std::int64_t step_seconds, std::int64_t n_steps)
    : start_(start), step_(step_seconds), n_steps_(n_steps) {
  if (step_ <= 0) throw ArgumentError("time grid step must be positive");
  if (n_steps_ <= 0) throw ArgumentError("time grid needs at least one step");
  if (3600 % step_ != 0 && step_ % 3600 != 0) {
    throw ArgumentError("time grid step " + std::to_string(step_) +
                        " s neither divides nor is a multiple of 3600 s");
  }
}

Timestamp TimeGrid::timestamp_of(std::int64_t i) const {
  if (i < 0 || i > n_steps_) {
    throw RangeError("step index " + std::to_string(i) + " outside [0, " +
                     std::to_string(n_steps_) + "]");
  }
  return start_ + seconds(i * step_);
}

double TimeGrid::hour_of_day(std::int64_t i) const {
  if (i < 0 || i >= n_steps_) {
    throw RangeError("step index " + std::to_string(i) + " outside [0, " +
                     std::to_string(n_steps_) + ")");
  }
  const Timestamp t = timestamp_of(i);
  const auto since_midnight = t - std::chrono::floor<days>(t);
  return static_cast<double>(since_midnight.count()) / 3600.0;
}

Timestamp make_utc(int year, unsigned month, unsigned day, int hour, int minute, int second) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw ArgumentError("invalid calendar date");
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59) {
    throw ArgumentError("invalid time of day");
  }
  return std::chrono::sys_days{ymd} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
         seconds{second};
}

std::string format_iso8601(Timestamp t) {
  const auto day = std::chrono::floor<days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string format_date(Timestamp t) { return format_iso8601(t).substr(0, 10); }

Timestamp parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !all_digits(text.substr(0, 4)) ||
      !all_digits(text.substr(5, 2)) || !all_digits(text.substr(8, 2))) {
    throw ArgumentError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  return make_utc(to_int(text.substr(0, 4)), to_int(text.substr(5, 2)), to_int(text.substr(8, 2)));
}

Timestamp parse_iso8601(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> Timestamp {
    throw ArgumentError("expected ISO-8601 UTC timestamp, got '" + original + "'");
  };
  if (text.ends_with('Z')) {
    text.remove_suffix(1);
  } else if (text.ends_with("+00:00")) {
    text.remove_suffix(6);
  } else {
    return fail();
  }
  if (text.size() != 16 && text.size() != 19) return fail();
  if (text[10] != 'T' || text[13] != ':') return fail();
  if (text.size() == 19 && text[16] != ':') return fail();
  const std::string_view hh = text.substr(11, 2);
  const std::string_view mm = text.substr(14, 2);
  const std::string_view ss = text.size() == 19 ? text.substr(17, 2) : std::string_view("00");
  if (!all_digits(hh) || !all_digits(mm) || !all_digits(ss)) return fail();
  try {
    const Timestamp day = parse_date(text.substr(0, 10));
    const std::chrono::year_month_day ymd{std::chrono::floor<days>(day)};
    return make_utc(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                    static_cast<unsigned>(ymd.day()), to_int(hh), to_int(mm), to_int(ss));
  } catch (const ArgumentError&) {
    return fail();
  }
}

}  // namespace hlgym
