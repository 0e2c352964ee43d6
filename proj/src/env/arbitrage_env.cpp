#include "hlgym/env/arbitrage_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "hlgym/errors.hpp"

namespace hlgym::env {

void ArbitrageEnvConfig::validate() const {
  try {
    battery.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (static_cast<std::int64_t>(prices.size()) != grid.n_steps()) {
    throw ConfigError("env needs one price per grid step: " + std::to_string(prices.size()) + " for " +
                      std::to_string(grid.n_steps()));
  }
  if (action_set_kw.empty()) throw ConfigError("empty action set");
  if (std::find(action_set_kw.begin(), action_set_kw.end(), 0.0) == action_set_kw.end()) {
    throw ConfigError("action set must contain the idle action 0 kW");
  }
  for (double a : action_set_kw) {
    if (!std::isfinite(a) || std::abs(a) > battery.p_max_kw) {
      throw ConfigError("action " + std::to_string(a) + " kW exceeds battery p_max");
    }
  }
  if (!(initial_soc >= battery.soc_min && initial_soc <= battery.soc_max)) {
    throw ConfigError("initial soc outside [soc_min, soc_max]");
  }
  if (clock.kind == ClockMode::Kind::scaled && !(clock.factor > 0)) {
    throw ConfigError("scaled clock needs a positive factor");
  }
}

std::size_t ArbitrageEnvConfig::idle_action() const {
  return static_cast<std::size_t>(std::find(action_set_kw.begin(), action_set_kw.end(), 0.0) -
                                  action_set_kw.begin());
}

ArbitrageEnv::ArbitrageEnv(ArbitrageEnvConfig config, Backend& backend)
    : config_((config.validate(), std::move(config))), backend_(&backend), record_(config_.grid) {}

std::vector<double> ArbitrageEnv::observation(double soc, std::int64_t i) const {
  const auto& g = config_.grid;
  const Timestamp t = g.timestamp_of(i);
  const double hour = static_cast<double>((t - std::chrono::floor<std::chrono::days>(t)).count()) / 3600.0;
  const double angle = 2.0 * std::numbers::pi * hour / 24.0;
  const auto price_index = static_cast<std::size_t>(std::min(i, g.n_steps() - 1));
  return {soc, config_.prices[price_index].eur_per_mwh() / price_norm_eur_mwh, std::sin(angle),
          std::cos(angle)};
}

StepResult ArbitrageEnv::reset(Seed seed) {
  backend_->reset(config_.grid, config_.initial_soc, seed);
  const auto obs = backend_->observe();
  baseline_soc_ = obs.soc;
  record_ = EpisodeRecord(config_.grid);
  started_ = true;
  terminated_ = false;
  truncated_ = false;
  step_ = 0;
  wall_start_ = std::chrono::steady_clock::now();

  StepResult r;
  r.observation = observation(obs.soc, 0);
  last_observation_ = r.observation;
  r.info.price_eur_mwh = config_.prices[0].eur_per_mwh();
  r.info.next_price_eur_mwh = r.info.price_eur_mwh;
  r.info.soc = obs.soc;
  r.info.temp_c = obs.temp_c;
  return r;
}

void ArbitrageEnv::pace(std::int64_t completed_steps) const {
  switch (config_.clock.kind) {
    case ClockMode::Kind::virtual_time:
      return;
    case ClockMode::Kind::scaled: {
      const auto wall = std::chrono::duration<double>(
          static_cast<double>(completed_steps * config_.grid.step_seconds()) / config_.clock.factor);
      std::this_thread::sleep_until(wall_start_ +
                                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(wall));
      return;
    }
    case ClockMode::Kind::wall: {
      const auto due = config_.grid.timestamp_of(completed_steps);
      std::this_thread::sleep_until(std::chrono::system_clock::time_point(due));
      return;
    }
  }
}

StepResult ArbitrageEnv::step(std::size_t action) {
  if (!started_) throw LifecycleError("step called before reset");
  if (terminated_) throw LifecycleError("step called after the episode terminated");
  if (truncated_) throw LifecycleError("step called after the episode was truncated");
  if (action >= config_.action_set_kw.size()) {
    throw RangeError("action " + std::to_string(action) + " outside [0, " +
                     std::to_string(config_.action_set_kw.size()) + ")");
  }
  const std::int64_t i = step_;
  const PowerKW setpoint(config_.action_set_kw[action]);
  BackendObservation obs;
  try {
    backend_->apply_setpoint(setpoint);
    backend_->advance();
    obs = backend_->observe();
  } catch (const TransportError&) {
    truncated_ = true;
    throw;
  }
  pace(i + 1);

  const double price = config_.prices[static_cast<std::size_t>(i)].eur_per_mwh();
  const double dt_h = config_.grid.step_hours();
  StepResult r;
  r.reward = arbitrage_reward(price, obs.delivered.kw(), dt_h);
  step_ = i + 1;
  terminated_ = step_ >= config_.grid.n_steps();
  r.terminated = terminated_;
  r.observation = observation(obs.soc, step_);
  r.info.delivered_kw = obs.delivered.kw();
  r.info.setpoint_kw = setpoint.kw();
  r.info.price_eur_mwh = price;
  r.info.next_price_eur_mwh =
      config_.prices[static_cast<std::size_t>(std::min(step_, config_.grid.n_steps() - 1))].eur_per_mwh();
  r.info.soc = obs.soc;
  r.info.temp_c = obs.temp_c;
  r.info.step = step_;

  EpisodeRow row;
  row.step = i;
  row.observation = last_observation_;
  row.action = action;
  row.setpoint = setpoint;
  row.delivered = obs.delivered;
  row.soc = obs.soc;
  row.price = EnergyPrice(price);
  row.temp_c = obs.temp_c;
  row.reward_eur = r.reward;
  record_.append(std::move(row));
  last_observation_ = r.observation;
  return r;
}

}  // namespace hlgym::env
