#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hlgym/random.hpp"
#include "hlgym/time_grid.hpp"
#include "hlgym/units.hpp"

namespace hlgym {

struct PricePoint {
  Timestamp start;  // on the hour
  EnergyPrice price;

  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

// Hourly day-ahead prices, contiguous and strictly increasing.
class PriceSeries {
 public:
  static constexpr std::int64_t resolution_s = 3600;

  // Throws ValidationError naming the first offending timestamp.
  explicit PriceSeries(std::vector<PricePoint> points);

  const std::vector<PricePoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  Timestamp begin_time() const;
  // One hour past the last point.
  Timestamp end_time() const;

  // Points whose hour starts in [from, to).
  PriceSeries slice(Timestamp from, Timestamp to) const;
  PriceSeries concat(const PriceSeries& later) const;

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

 private:
  std::vector<PricePoint> points_;
};

// CSV `timestamp,price_eur_mwh`.
PriceSeries load_fixture(const std::filesystem::path& path);
void save_fixture(const PriceSeries& series, const std::filesystem::path& path);
std::string format_fixture(const PriceSeries& series);
PriceSeries parse_fixture(const std::string& text);

// Zero-order hold onto the control grid. Throws RangeError naming the first
// uncovered step.
std::vector<EnergyPrice> resample(const PriceSeries& series, const TimeGrid& grid);

struct FetchOptions {
  int retries = 2;
  std::chrono::milliseconds backoff{1000};  // doubled after every retry
  std::chrono::milliseconds timeout{5000};
};

// GET <endpoint>?area=<code>&date=<YYYY-MM-DD>, expecting a JSON array of
// {"start": ISO-8601, "price": number} covering the whole UTC day.
// Throws TransportError after exhausted retries, ParseError on schema
// violations and ValidationError on continuity or coverage failures.
PriceSeries fetch_day_ahead(const std::string& endpoint, const std::string& area, Timestamp day,
                            const FetchOptions& options = {});

// JSON body served by the day-ahead endpoint.
std::string price_json(const PriceSeries& series);
PriceSeries parse_price_json(const std::string& body);

struct PriceStubScript {
  int fail_first = 0;       // answer the first n requests with HTTP 500
  int drop_last_hours = 0;  // truncate every served day
};

// Local stand-in for the day-ahead endpoint, serving days out of a series.
class PriceStubServer {
 public:
  using Script = PriceStubScript;

  // Port 0 picks an ephemeral port. Serves path `/dayahead`.
  PriceStubServer(PriceSeries series, std::uint16_t port = 0, Script script = {});
  ~PriceStubServer();
  PriceStubServer(const PriceStubServer&) = delete;
  PriceStubServer& operator=(const PriceStubServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::string endpoint() const;
  int requests() const;
  // Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

// Synthetic BELPEX-like year of hourly prices: two daily peaks, a midday
// solar dip that deepens in summer, winter premium, weekend discount and
// AR(1) day-level noise. Mean close to 100 EUR/MWh.
PriceSeries synthetic_belpex_year(int year, Seed seed);

// Two-level day: `low` for hours [0, 12), `high` for [12, 24).
PriceSeries two_tier_day(Timestamp day, double low, double high);

}  // namespace hlgym
