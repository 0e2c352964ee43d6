#include "hlgym/control/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hlgym/env/arbitrage_env.hpp"
#include "hlgym/errors.hpp"

namespace hlgym::control {

namespace {

// Fractional grid positions this close to an integer are treated as on the
// grid, so commensurate instances never interpolate.
constexpr double snap_tolerance = 1e-9;

std::size_t idle_index(const std::vector<double>& actions) {
  for (std::size_t a = 0; a < actions.size(); ++a) {
    if (actions[a] == 0.0) return a;
  }
  return actions.size();
}

struct Transition {
  double reward;
  double soc;
};

Transition transition(const DPProblem& p, std::size_t i, double soc, std::size_t a) {
  const auto res = battery_step(p.battery, BatteryState{soc, PowerKW(0.0)}, PowerKW(p.action_set_kw[a]), p.dt_h);
  return {env::arbitrage_reward(p.prices[i].eur_per_mwh(), res.delivered.kw(), p.dt_h), res.state.soc};
}

// Argmax with idle first, then ascending index; strict comparison keeps the
// earlier candidate on ties.
template <class F>
std::pair<std::size_t, double> best_action(std::size_t n_actions, std::size_t idle, F&& q) {
  std::size_t best = idle < n_actions ? idle : 0;
  double best_q = q(best);
  for (std::size_t a = 0; a < n_actions; ++a) {
    if (a == best) continue;
    const double v = q(a);
    if (v > best_q) {
      best = a;
      best_q = v;
    }
  }
  return {best, best_q};
}

}  // namespace

double DPSolution::value_at(std::size_t i, double soc) const {
  const auto& v = value.at(i);
  const std::size_t n = soc_grid.size();
  const double lo = soc_grid.front();
  const double h = (soc_grid.back() - lo) / static_cast<double>(n - 1);
  const double x = std::clamp((soc - lo) / h, 0.0, static_cast<double>(n - 1));
  const double nearest = std::round(x);
  if (std::abs(x - nearest) < snap_tolerance) return v[static_cast<std::size_t>(nearest)];
  const auto k = std::min(static_cast<std::size_t>(x), n - 2);
  const double f = x - static_cast<double>(k);
  return v[k] + f * (v[k + 1] - v[k]);
}

DPSolution dp_solve(const DPProblem& p, std::size_t N) {
  p.battery.validate();
  if (!p.battery.ideal) throw ArgumentError("dp_solve needs deterministic (ideal) battery dynamics");
  if (N < 2) throw ArgumentError("dp_solve: grid size N must be >= 2");
  if (p.prices.empty()) throw ArgumentError("dp_solve: empty horizon");
  if (p.action_set_kw.empty()) throw ArgumentError("dp_solve: empty action set");
  if (!(p.dt_h > 0.0)) throw ArgumentError("dp_solve: dt_h must be > 0");
  if (!(p.initial_soc >= p.battery.soc_min && p.initial_soc <= p.battery.soc_max)) {
    throw ArgumentError("dp_solve: initial soc outside [soc_min, soc_max]");
  }

  DPSolution s;
  s.initial_soc = p.initial_soc;
  const double lo = p.battery.soc_min, hi = p.battery.soc_max;
  s.soc_grid.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    s.soc_grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(N - 1);
  }
  s.soc_grid.back() = hi;

  const std::size_t n = p.prices.size();
  const std::size_t idle = idle_index(p.action_set_kw);
  s.value.assign(n + 1, std::vector<double>(N, 0.0));
  s.policy.assign(n, std::vector<std::size_t>(N, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = 0; k < N; ++k) {
      const auto [a, q] = best_action(p.action_set_kw.size(), idle, [&](std::size_t a) {
        const auto t = transition(p, i, s.soc_grid[k], a);
        return t.reward + s.value_at(i + 1, t.soc);
      });
      s.policy[i][k] = a;
      s.value[i][k] = q;
    }
  }
  s.optimal_profit = s.value_at(0, p.initial_soc);
  return s;
}

std::size_t dp_greedy_action(const DPProblem& p, const DPSolution& s, std::size_t i, double soc) {
  return best_action(p.action_set_kw.size(), idle_index(p.action_set_kw), [&](std::size_t a) {
           const auto t = transition(p, i, soc, a);
           return t.reward + s.value_at(i + 1, t.soc);
         }).first;
}

Rollout evaluate_actions(const DPProblem& p, const std::vector<std::size_t>& actions) {
  if (actions.size() != p.prices.size()) throw ArgumentError("action sequence length != horizon");
  Rollout r;
  double soc = p.initial_soc;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] >= p.action_set_kw.size()) throw RangeError("action index out of range");
    const auto t = transition(p, i, soc, actions[i]);
    r.actions.push_back(actions[i]);
    r.rewards.push_back(t.reward);
    r.soc.push_back(t.soc);
    soc = t.soc;
  }
  double total = 0.0;
  for (std::size_t i = r.rewards.size(); i-- > 0;) total = r.rewards[i] + total;
  r.profit = total;
  return r;
}

Rollout dp_rollout(const DPProblem& p, const DPSolution& s) {
  std::vector<std::size_t> actions;
  double soc = p.initial_soc;
  for (std::size_t i = 0; i < p.prices.size(); ++i) {
    const auto a = dp_greedy_action(p, s, i, soc);
    actions.push_back(a);
    soc = transition(p, i, soc, a).soc;
  }
  return evaluate_actions(p, actions);
}

}  // namespace hlgym::control
