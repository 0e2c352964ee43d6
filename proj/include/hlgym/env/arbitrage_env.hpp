#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <vector>

#include "hlgym/battery.hpp"
#include "hlgym/env/backend.hpp"
#include "hlgym/episode.hpp"
#include "hlgym/random.hpp"
#include "hlgym/time_grid.hpp"
#include "hlgym/units.hpp"

namespace hlgym::env {

// Divides prices in the observation so features stay roughly in [-1, 1].
inline constexpr double price_norm_eur_mwh = 200.0;
inline constexpr std::size_t observation_size = 4;

struct ClockMode {
  enum class Kind { virtual_time, scaled, wall };
  Kind kind = Kind::virtual_time;
  double factor = 1.0;  // scaled: emulated seconds per wall second

  static ClockMode virtual_time() { return {}; }
  static ClockMode scaled(double factor) { return {Kind::scaled, factor}; }
  static ClockMode wall() { return {Kind::wall, 1.0}; }
};

struct ArbitrageEnvConfig {
  TimeGrid grid{make_utc(2023, 1, 1), 900, 96};
  std::vector<EnergyPrice> prices;  // one per grid step
  BatteryParams battery;
  std::vector<double> action_set_kw{-1.0, 0.0, 1.0};
  double initial_soc = 0.5;
  ClockMode clock;

  // Throws ConfigError.
  void validate() const;
  std::size_t idle_action() const;
};

struct StepInfo {
  double delivered_kw = 0.0;
  double setpoint_kw = 0.0;
  double price_eur_mwh = 0.0;       // price the reward was settled at
  double next_price_eur_mwh = 0.0;  // raw price behind observation[1]
  double soc = 0.0;
  double temp_c = 0.0;
  std::int64_t step = 0;            // steps executed so far
};

struct StepResult {
  std::vector<double> observation;  // [soc, price/200, sin(2 pi h/24), cos(2 pi h/24)]
  double reward = 0.0;              // EUR
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

// Arbitrage cash flow of delivering `delivered_kw` for dt_h hours at
// `price` EUR/MWh: import costs, export earns.
inline double arbitrage_reward(double price_eur_mwh, double delivered_kw, double dt_h) {
  return -price_eur_mwh * delivered_kw * dt_h / 1000.0;
}

// Episodic battery-arbitrage environment over a pluggable backend.
// Single-controller: callers serialize reset/step.
class ArbitrageEnv {
 public:
  ArbitrageEnv(ArbitrageEnvConfig config, Backend& backend);

  StepResult reset(Seed seed);
  StepResult step(std::size_t action);

  const ArbitrageEnvConfig& config() const noexcept { return config_; }
  std::size_t action_count() const noexcept { return config_.action_set_kw.size(); }
  // SoC found at reset; on hardware this is whatever the battery reported.
  double baseline_soc() const noexcept { return baseline_soc_; }
  const EpisodeRecord& record() const { return record_; }
  bool terminated() const noexcept { return terminated_; }
  bool truncated() const noexcept { return truncated_; }
  Backend& backend() noexcept { return *backend_; }

 private:
  std::vector<double> observation(double soc, std::int64_t i) const;
  void pace(std::int64_t completed_steps) const;

  ArbitrageEnvConfig config_;
  Backend* backend_;
  EpisodeRecord record_;
  bool started_ = false;
  bool terminated_ = false;
  bool truncated_ = false;
  std::int64_t step_ = 0;
  double baseline_soc_ = 0.0;
  std::vector<double> last_observation_;
  std::chrono::steady_clock::time_point wall_start_;
};

}  // namespace hlgym::env
