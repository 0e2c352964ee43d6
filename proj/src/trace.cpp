#include "hlgym/trace.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "csv.hpp"
#include "hlgym/errors.hpp"

namespace hlgym {

Trace::Trace(TimeGrid grid, std::vector<PowerKW> samples, TraceKind kind)
    : grid_(grid), samples_(std::move(samples)) {
  if (static_cast<std::int64_t>(samples_.size()) != grid_.n_steps()) {
    throw ArgumentError("trace has " + std::to_string(samples_.size()) + " samples for a grid of " +
                        std::to_string(grid_.n_steps()) + " steps");
  }
  for (const auto& s : samples_) {
    if (kind == TraceKind::pv && s.kw() > 0.0) throw ArgumentError("PV trace sample > 0 kW");
    if (kind == TraceKind::load && s.kw() < 0.0) throw ArgumentError("load trace sample < 0 kW");
  }
}

PowerKW Trace::sample(std::int64_t i) const {
  if (i < 0 || i >= grid_.n_steps()) {
    throw RangeError("trace index " + std::to_string(i) + " outside [0, " +
                     std::to_string(grid_.n_steps()) + ")");
  }
  return samples_[static_cast<std::size_t>(i)];
}

Trace load_trace_csv(const std::filesystem::path& path, std::int64_t step_seconds, TraceKind kind) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open trace file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
  ++line_no;
  if (detail::trim(line) != "timestamp,power_kw") {
    throw ParseError("expected header 'timestamp,power_kw'", line_no);
  }
  std::vector<Timestamp> stamps;
  std::vector<PowerKW> samples;
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
    if (!stamps.empty() && t - stamps.back() != std::chrono::seconds(step_seconds)) {
      throw ParseError("timestamp " + std::string(fields[0]) + " is not one step after the previous",
                       line_no);
    }
    const double kw = detail::parse_double(fields[1], line_no);
    try {
      samples.emplace_back(kw);
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), line_no);
    }
    stamps.push_back(t);
  }
  if (samples.empty()) throw ParseError("trace has no samples", line_no);
  const TimeGrid grid(stamps.front(), step_seconds, static_cast<std::int64_t>(samples.size()));
  return Trace(grid, std::move(samples), kind);
}

void save_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write trace file " + path.string());
  out << "timestamp,power_kw\n";
  for (std::int64_t i = 0; i < trace.grid().n_steps(); ++i) {
    out << format_iso8601(trace.grid().timestamp_of(i)) << ','
        << detail::format_exact(trace.sample(i).kw()) << '\n';
  }
}

Trace synthetic_pv_trace(const TimeGrid& grid, double peak_kw) {
  std::vector<PowerKW> samples;
  samples.reserve(static_cast<std::size_t>(grid.n_steps()));
  for (std::int64_t i = 0; i < grid.n_steps(); ++i) {
    const double h = grid.hour_of_day(i);
    double kw = 0.0;
    if (h > 6.0 && h < 20.0) {
      const double s = std::sin(std::numbers::pi * (h - 6.0) / 14.0);
      kw = -peak_kw * s * s;
    }
    samples.emplace_back(kw);
  }
  return Trace(grid, std::move(samples), TraceKind::pv);
}

Trace synthetic_load_trace(const TimeGrid& grid, Seed seed, double base_kw) {
  Rng rng = Rng::derived(seed, 0x10ad);
  std::vector<PowerKW> samples;
  samples.reserve(static_cast<std::size_t>(grid.n_steps()));
  auto bump = [](double h, double centre, double width) {
    const double z = (h - centre) / width;
    return std::exp(-0.5 * z * z);
  };
  for (std::int64_t i = 0; i < grid.n_steps(); ++i) {
    const double h = grid.hour_of_day(i);
    const double kw = base_kw + 0.6 * bump(h, 7.5, 1.0) + 1.2 * bump(h, 19.0, 1.5) +
                      0.05 * std::abs(rng.normal());
    samples.emplace_back(kw);
  }
  return Trace(grid, std::move(samples), TraceKind::load);
}

PowerKW meter_net_kw(PowerKW load, PowerKW pv, PowerKW battery_ac) {
  return PowerKW(load.kw() + pv.kw() + battery_ac.kw());
}

}  // namespace hlgym
