#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace hlgym {

using Timestamp = std::chrono::sys_seconds;

// Uniform step schedule anchoring price series, traces and episodes.
// All times are UTC.
class TimeGrid {
 public:
  // Throws ArgumentError unless step > 0, n_steps > 0 and step either
  // divides 3600 or is a multiple of it.
  TimeGrid(Timestamp start, std::int64_t step_seconds, std::int64_t n_steps);

  Timestamp start() const noexcept { return start_; }
  std::int64_t step_seconds() const noexcept { return step_; }
  std::int64_t n_steps() const noexcept { return n_steps_; }
  double step_hours() const noexcept { return static_cast<double>(step_) / 3600.0; }
  Timestamp end() const noexcept { return timestamp_of(n_steps_); }

  // Valid for 0 <= i <= n_steps.
  Timestamp timestamp_of(std::int64_t i) const;
  // Fractional UTC hour in [0, 24). Valid for 0 <= i < n_steps.
  double hour_of_day(std::int64_t i) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  Timestamp start_;
  std::int64_t step_;
  std::int64_t n_steps_;
};

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(Timestamp t);
// "YYYY-MM-DD"
std::string format_date(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SSZ", "YYYY-MM-DDTHH:MMZ" and the same with a
// "+00:00" suffix. Throws ArgumentError on anything else.
Timestamp parse_iso8601(std::string_view text);
// "YYYY-MM-DD" at 00:00 UTC.
Timestamp parse_date(std::string_view text);

Timestamp make_utc(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                   int second = 0);

}  // namespace hlgym
