#pragma once

#include <cstdint>
#include <vector>

#include "hlgym/time_grid.hpp"
#include "hlgym/units.hpp"

namespace hlgym {

struct EpisodeRow {
  std::int64_t step = 0;
  std::vector<double> observation;  // observation the action was chosen from
  std::size_t action = 0;
  PowerKW setpoint;
  PowerKW delivered;
  double soc = 0.0;  // after the step
  EnergyPrice price;
  double temp_c = 0.0;
  double reward_eur = 0.0;
};

// Per-step log of one run. Rows are contiguous in step index starting at 0.
class EpisodeRecord {
 public:
  explicit EpisodeRecord(TimeGrid grid) : grid_(grid) {}

  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<EpisodeRow>& rows() const noexcept { return rows_; }

  // Throws ArgumentError when the row breaks step contiguity or soc bounds.
  void append(EpisodeRow row);

  double total_reward() const;

 private:
  TimeGrid grid_;
  std::vector<EpisodeRow> rows_;
};

}  // namespace hlgym
