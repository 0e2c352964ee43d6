#include "hlgym/prices.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "csv.hpp"
#include "hlgym/errors.hpp"

namespace hlgym {

namespace {

constexpr std::chrono::seconds one_hour{3600};

}  // namespace

PriceSeries::PriceSeries(std::vector<PricePoint> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Timestamp t = points_[i].start;
    if ((t.time_since_epoch().count() % resolution_s) != 0) {
      throw ValidationError("price timestamp " + format_iso8601(t) + " is not on the hour");
    }
    if (i == 0) continue;
    const Timestamp prev = points_[i - 1].start;
    if (t <= prev) throw ValidationError("duplicate or out-of-order hour at " + format_iso8601(t));
    if (t - prev != one_hour) {
      throw ValidationError("missing price hour at " + format_iso8601(prev + one_hour));
    }
  }
}

Timestamp PriceSeries::begin_time() const {
  if (points_.empty()) throw RangeError("empty price series");
  return points_.front().start;
}

Timestamp PriceSeries::end_time() const {
  if (points_.empty()) throw RangeError("empty price series");
  return points_.back().start + one_hour;
}

PriceSeries PriceSeries::slice(Timestamp from, Timestamp to) const {
  std::vector<PricePoint> out;
  for (const auto& p : points_) {
    if (p.start >= from && p.start < to) out.push_back(p);
  }
  return PriceSeries(std::move(out));
}

PriceSeries PriceSeries::concat(const PriceSeries& later) const {
  std::vector<PricePoint> out = points_;
  out.insert(out.end(), later.points_.begin(), later.points_.end());
  return PriceSeries(std::move(out));
}

PriceSeries parse_fixture(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || detail::trim(line) != "timestamp,price_eur_mwh") {
    throw ParseError("expected header 'timestamp,price_eur_mwh'", 1);
  }
  std::vector<PricePoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line);
    if (fields.size() != 2) throw ParseError("expected 2 fields", line_no);
    Timestamp t;
    try {
      t = parse_iso8601(fields[0]);
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), line_no);
    }
    points.push_back({t, EnergyPrice(detail::parse_double(fields[1], line_no))});
  }
  return PriceSeries(std::move(points));
}

PriceSeries load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open price fixture " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_fixture(buf.str());
}

std::string format_fixture(const PriceSeries& series) {
  std::string out = "timestamp,price_eur_mwh\n";
  for (const auto& p : series.points()) {
    out += format_iso8601(p.start);
    out += ',';
    out += detail::format_exact(p.price.eur_per_mwh());
    out += '\n';
  }
  return out;
}

void save_fixture(const PriceSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write price fixture " + path.string());
  out << format_fixture(series);
  if (!out) throw NotFoundError("failed writing price fixture " + path.string());
}

std::vector<EnergyPrice> resample(const PriceSeries& series, const TimeGrid& grid) {
  if (PriceSeries::resolution_s % grid.step_seconds() != 0) {
    throw ArgumentError("grid step must divide one hour for resampling");
  }
  std::vector<EnergyPrice> out;
  out.reserve(static_cast<std::size_t>(grid.n_steps()));
  for (std::int64_t i = 0; i < grid.n_steps(); ++i) {
    const Timestamp t = grid.timestamp_of(i);
    if (series.empty() || t < series.begin_time() || t >= series.end_time()) {
      throw RangeError("price series does not cover step " + std::to_string(i) + " at " +
                       format_iso8601(t));
    }
    const auto hour = (t - series.begin_time()) / one_hour;
    out.push_back(series.points()[static_cast<std::size_t>(hour)].price);
  }
  return out;
}

PriceSeries two_tier_day(Timestamp day, double low, double high) {
  std::vector<PricePoint> pts;
  for (int h = 0; h < 24; ++h) pts.push_back({day + h * one_hour, EnergyPrice(h < 12 ? low : high)});
  return PriceSeries(std::move(pts));
}

PriceSeries synthetic_belpex_year(int year, Seed seed) {
  Rng rng = Rng::derived(seed, 0xbe1);
  const Timestamp first = make_utc(year, 1, 1);
  const Timestamp last = make_utc(year + 1, 1, 1);
  const auto n_days = std::chrono::duration_cast<std::chrono::days>(last - first).count();
  auto bump = [](double h, double centre, double width) {
    const double z = (h - centre) / width;
    return std::exp(-0.5 * z * z);
  };
  std::vector<PricePoint> pts;
  pts.reserve(static_cast<std::size_t>(n_days * 24));
  double level_noise = 0.0;
  for (std::int64_t d = 0; d < n_days; ++d) {
    const Timestamp day = first + std::chrono::days(d);
    const double season = std::cos(2.0 * std::numbers::pi * (static_cast<double>(d) - 15.0) / 365.0);
    const double summer = 0.5 * (1.0 - season);  // 0 in mid-January, 1 in mid-July
    const std::chrono::weekday wd{std::chrono::floor<std::chrono::days>(day)};
    const bool weekend = wd == std::chrono::Saturday || wd == std::chrono::Sunday;
    level_noise = 0.7 * level_noise + 9.0 * rng.normal();
    const double level = 100.0 + 22.0 * season + level_noise - (weekend ? 12.0 : 0.0);
    const double spread = 1.0 + 0.15 * rng.normal();
    for (int h = 0; h < 24; ++h) {
      const double hh = h + 0.5;
      double shape = 28.0 * bump(hh, 8.0, 1.3) + 42.0 * bump(hh, 19.0, 1.8) -
                     18.0 * bump(hh, 3.5, 2.2) - (22.0 + 45.0 * summer) * bump(hh, 13.5, 2.3);
      const double price = level + spread * shape + 4.0 * rng.normal();
      pts.push_back({day + h * one_hour, EnergyPrice(std::round(price * 100.0) / 100.0)});
    }
  }
  return PriceSeries(std::move(pts));
}

}  // namespace hlgym
