#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "hlgym/control/qlearning.hpp"
#include "hlgym/env/arbitrage_env.hpp"
#include "hlgym/units.hpp"

namespace hlgym::control {

// Maps the latest reset/step result to an action index.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::size_t act(const env::StepResult& last) const = 0;
};

class ThresholdPolicy final : public Policy {
 public:
  // Charges at the largest action, discharges at the most negative one.
  ThresholdPolicy(EnergyPrice buy_below, EnergyPrice sell_above, std::vector<double> action_set_kw);

  std::string name() const override { return "threshold"; }
  std::size_t act(const env::StepResult& last) const override;

 private:
  double buy_below_;
  double sell_above_;
  std::size_t charge_ = 0, idle_ = 0, discharge_ = 0;
};

// Throws ArgumentError when buy_below > sell_above.
ThresholdPolicy threshold_policy(EnergyPrice buy_below, EnergyPrice sell_above,
                                 std::vector<double> action_set_kw = {-1.0, 0.0, 1.0});

// Frozen greedy Q-learning policy: state discretization plus one action per
// state. Round-trips through a small text file.
class QPolicy final : public Policy {
 public:
  QPolicy(const QTable& table, PriceBins bins, std::vector<double> action_set_kw, std::string config_hash);

  std::string name() const override { return "qlearning"; }
  std::size_t act(const env::StepResult& last) const override;

  const std::vector<std::size_t>& actions() const noexcept { return actions_; }
  const PriceBins& bins() const noexcept { return bins_; }
  const std::vector<double>& action_set_kw() const noexcept { return action_set_kw_; }
  const std::string& config_hash() const noexcept { return config_hash_; }

  std::string to_text() const;
  // Throws ParseError.
  static QPolicy parse(const std::string& text);
  void save(const std::filesystem::path& path) const;
  // Throws NotFoundError for a missing file, ParseError for a bad one.
  static QPolicy load(const std::filesystem::path& path);

 private:
  QPolicy() = default;

  std::vector<std::size_t> actions_;
  PriceBins bins_;
  std::vector<double> action_set_kw_;
  std::string config_hash_;
};

// Runs one greedy episode and returns the env's record.
EpisodeRecord evaluate(const Policy& policy, env::ArbitrageEnv& env, Seed seed);

}  // namespace hlgym::control
