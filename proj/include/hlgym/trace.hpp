#pragma once

#include <filesystem>
#include <vector>

#include "hlgym/random.hpp"
#include "hlgym/time_grid.hpp"
#include "hlgym/units.hpp"

namespace hlgym {

enum class TraceKind { pv, load, any };

// Power trace sampled on a TimeGrid, replayed with zero-order hold.
class Trace {
 public:
  // Throws ArgumentError when the length mismatches the grid or samples
  // violate the sign convention of `kind`.
  Trace(TimeGrid grid, std::vector<PowerKW> samples, TraceKind kind = TraceKind::any);

  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<PowerKW>& samples() const noexcept { return samples_; }

  PowerKW sample(std::int64_t i) const;

 private:
  TimeGrid grid_;
  std::vector<PowerKW> samples_;
};

inline PowerKW trace_sample(const Trace& trace, std::int64_t i) { return trace.sample(i); }

// CSV with header `timestamp,power_kw`; timestamps must sit on consecutive
// steps of a grid with the given step length. Errors carry line numbers.
Trace load_trace_csv(const std::filesystem::path& path, std::int64_t step_seconds,
                     TraceKind kind = TraceKind::any);
void save_trace_csv(const Trace& trace, const std::filesystem::path& path);

// Clear-sky PV bell between 06:00 and 20:00 UTC, peaking at -peak_kw at 13:00.
Trace synthetic_pv_trace(const TimeGrid& grid, double peak_kw = 3.0);
// Base load with morning and evening bumps plus small seeded jitter.
Trace synthetic_load_trace(const TimeGrid& grid, Seed seed, double base_kw = 0.3);

// Net grid exchange seen by the smart meter.
PowerKW meter_net_kw(PowerKW load, PowerKW pv, PowerKW battery_ac);

}  // namespace hlgym
