#include "hlgym/control/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hlgym/errors.hpp"

namespace hlgym::control {

PriceBins PriceBins::deciles(std::vector<double> prices) {
  if (prices.empty()) throw ArgumentError("price deciles need at least one price");
  std::sort(prices.begin(), prices.end());
  PriceBins b;
  const std::size_t n = prices.size();
  for (std::size_t k = 1; k < QTable::price_bins; ++k) b.edges.push_back(prices[k * n / QTable::price_bins]);
  return b;
}

std::size_t PriceBins::bin(double price) const {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), price) - edges.begin());
}

StateFeatures state_features(const env::StepResult& last, const PriceBins& bins) {
  const auto& o = last.observation;
  if (o.size() != env::observation_size) throw ArgumentError("unexpected observation size");
  StateFeatures f;
  f.soc_bin = static_cast<std::size_t>(std::clamp(std::lround(o[0] * 10.0), 0L, 10L));
  f.price_bin = std::min(bins.bin(last.info.next_price_eur_mwh), QTable::price_bins - 1);
  double hour = std::atan2(o[2], o[3]) * 24.0 / (2.0 * std::numbers::pi);
  if (hour < 0) hour += 24.0;
  f.hour = static_cast<std::size_t>(std::floor(hour + 1e-6)) % QTable::hours;
  return f;
}

QTable::QTable(std::size_t action_count, std::size_t idle_action)
    : actions_(action_count), idle_(idle_action), values_(state_count * action_count, 0.0) {
  if (action_count == 0) throw ArgumentError("QTable needs at least one action");
  if (idle_action >= action_count) throw ArgumentError("idle action outside the action set");
}

std::size_t QTable::index(const StateFeatures& f) {
  if (f.soc_bin >= soc_bins || f.price_bin >= price_bins || f.hour >= hours) {
    throw RangeError("state features out of range");
  }
  return (f.soc_bin * price_bins + f.price_bin) * hours + f.hour;
}

StateFeatures QTable::features(std::size_t s) {
  if (s >= state_count) throw RangeError("state index " + std::to_string(s) + " out of range");
  return {s / (price_bins * hours), (s / hours) % price_bins, s % hours};
}

void QTable::check(std::size_t s, std::size_t a) const {
  if (s >= state_count) throw RangeError("state index " + std::to_string(s) + " out of range");
  if (a >= actions_) throw RangeError("action index " + std::to_string(a) + " out of range");
}

double QTable::q(std::size_t s, std::size_t a) const {
  check(s, a);
  return values_[s * actions_ + a];
}

void QTable::set(std::size_t s, std::size_t a, double v) {
  check(s, a);
  if (!std::isfinite(v)) throw ArgumentError("Q values must be finite");
  values_[s * actions_ + a] = v;
}

double QTable::max_q(std::size_t s) const { return q(s, greedy(s)); }

std::size_t QTable::greedy(std::size_t s) const {
  check(s, 0);
  const double* row = &values_[s * actions_];
  std::size_t best = idle_;
  for (std::size_t a = 0; a < actions_; ++a) {
    if (row[a] > row[best]) best = a;
  }
  return best;
}

double QTable::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void q_update(QTable& t, std::size_t s, std::size_t a, double r, std::size_t s_next, bool done, double alpha,
              double gamma) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ArgumentError("gamma must be in [0, 1]");
  const double next = t.max_q(s_next);  // validates s_next even when done
  const double target = r + gamma * (done ? 0.0 : next);
  const double q = t.q(s, a);
  t.set(s, a, q + alpha * (target - q));
}

double QHyper::epsilon(int episode, int episodes) const {
  const double span = decay_fraction * episodes;
  const double f = span > 0 ? std::min(1.0, episode / span) : 1.0;
  return std::lerp(epsilon_start, epsilon_end, f);
}

std::vector<TrainingDay> split_days(const PriceSeries& series, std::int64_t step_seconds) {
  std::vector<TrainingDay> days;
  if (series.empty()) return days;
  auto day = std::chrono::ceil<std::chrono::days>(series.begin_time());
  const std::int64_t n = 86400 / step_seconds;
  for (; day + std::chrono::days(1) <= series.end_time(); day += std::chrono::days(1)) {
    TimeGrid grid(Timestamp(day), step_seconds, n);
    days.push_back({grid, resample(series, grid)});
  }
  return days;
}

TrainResult train(env::Backend& backend, const env::ArbitrageEnvConfig& base, const std::vector<TrainingDay>& days,
                  const TrainOptions& o, Seed seed, const std::function<void(const EpisodeSummary&)>& on_episode) {
  if (base.clock.kind != env::ClockMode::Kind::virtual_time) {
    throw ConfigError("training must run on the virtual clock");
  }
  if (days.empty()) throw ConfigError("training needs at least one day of prices");
  if (o.episodes < 0) throw ConfigError("episode count must be >= 0");
  if (!(o.hyper.epsilon_start >= 0 && o.hyper.epsilon_start <= 1 && o.hyper.epsilon_end >= 0 &&
        o.hyper.epsilon_end <= 1)) {
    throw ConfigError("epsilon must be in [0, 1]");
  }

  std::vector<double> all;
  for (const auto& d : days) {
    for (const auto& p : d.prices) all.push_back(p.eur_per_mwh());
  }
  TrainResult out{QTable(base.action_set_kw.size(), base.idle_action()), PriceBins::deciles(all)};
  QTable& q = out.table;

  Rng rng = Rng::derived(seed, 1);
  for (int e = 0; e < o.episodes; ++e) {
    const auto& day = days[rng.index(days.size())];
    env::ArbitrageEnvConfig cfg = base;
    cfg.grid = day.grid;
    cfg.prices = day.prices;
    if (o.random_initial_soc) cfg.initial_soc = rng.uniform(cfg.battery.soc_min, cfg.battery.soc_max);
    env::ArbitrageEnv env(std::move(cfg), backend);

    const double eps = o.hyper.epsilon(e, o.episodes);
    auto last = env.reset(Seed{rng.next()});
    std::size_t s = QTable::index(state_features(last, out.bins));
    double total = 0.0;
    while (true) {
      const std::size_t a = rng.uniform() < eps ? rng.index(q.action_count()) : q.greedy(s);
      last = env.step(a);
      const std::size_t s2 = QTable::index(state_features(last, out.bins));
      q_update(q, s, a, last.reward, s2, last.terminated, o.hyper.alpha, o.hyper.gamma);
      total += last.reward;
      s = s2;
      if (last.terminated) break;
    }
    if (on_episode) on_episode({e, total, eps});
  }
  return out;
}

}  // namespace hlgym::control
