#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hlgym/env/arbitrage_env.hpp"
#include "hlgym/env/backend.hpp"
#include "hlgym/prices.hpp"
#include "hlgym/random.hpp"

namespace hlgym::control {

// Decile edges of a price sample; bin(p) counts the edges <= p, so 0..9.
struct PriceBins {
  std::vector<double> edges;

  static PriceBins deciles(std::vector<double> prices);
  std::size_t bin(double price_eur_mwh) const;
};

struct StateFeatures {
  std::size_t soc_bin = 0;    // 0..10
  std::size_t price_bin = 0;  // 0..9
  std::size_t hour = 0;       // 0..23
};

// SoC rounded to tenths; hour recovered from the sin/cos clock features.
StateFeatures state_features(const env::StepResult& last, const PriceBins& bins);

class QTable {
 public:
  static constexpr std::size_t soc_bins = 11;
  static constexpr std::size_t price_bins = 10;
  static constexpr std::size_t hours = 24;
  static constexpr std::size_t state_count = soc_bins * price_bins * hours;

  QTable(std::size_t action_count, std::size_t idle_action);

  // Throws RangeError outside the declared ranges.
  static std::size_t index(const StateFeatures& f);
  static StateFeatures features(std::size_t state);

  std::size_t action_count() const noexcept { return actions_; }
  std::size_t idle_action() const noexcept { return idle_; }
  double q(std::size_t s, std::size_t a) const;
  void set(std::size_t s, std::size_t a, double v);
  double max_q(std::size_t s) const;
  // Ties go to idle, then to the lower index.
  std::size_t greedy(std::size_t s) const;
  double max_abs() const;
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  void check(std::size_t s, std::size_t a) const;

  std::size_t actions_;
  std::size_t idle_;
  std::vector<double> values_;
};

// Q(s,a) += alpha * (r + gamma * (done ? 0 : max_b Q(s',b)) - Q(s,a)).
// RangeError for bad indices, ArgumentError for alpha/gamma out of range.
void q_update(QTable& table, std::size_t s, std::size_t a, double r, std::size_t s_next, bool done,
              double alpha, double gamma);

struct QHyper {
  double alpha = 0.1;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double decay_fraction = 0.8;  // of the episode budget

  double epsilon(int episode, int episodes) const;
};

// One day of prices on its own control grid.
struct TrainingDay {
  TimeGrid grid;
  std::vector<EnergyPrice> prices;
};

// Every whole UTC day of `series`, resampled to step_seconds.
std::vector<TrainingDay> split_days(const PriceSeries& series, std::int64_t step_seconds);

struct TrainOptions {
  int episodes = 2000;
  QHyper hyper;
  // Draws each episode's starting SoC uniformly from [soc_min, soc_max]
  // instead of the config's initial_soc, so every SoC bin gets visited at
  // every hour.
  bool random_initial_soc = true;
};

struct EpisodeSummary {
  int episode = 0;
  double reward = 0.0;
  double epsilon = 0.0;
};

struct TrainResult {
  QTable table;
  PriceBins bins;
};

// Epsilon-greedy Q-learning, one day per episode drawn from `days`. `base`
// supplies the battery, action set and clock; its grid and prices are
// replaced per day. Throws ConfigError unless the clock is virtual.
TrainResult train(env::Backend& backend, const env::ArbitrageEnvConfig& base,
                  const std::vector<TrainingDay>& days, const TrainOptions& options, Seed seed,
                  const std::function<void(const EpisodeSummary&)>& on_episode = {});

}  // namespace hlgym::control
