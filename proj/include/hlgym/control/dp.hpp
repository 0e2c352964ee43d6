#pragma once

#include <cstddef>
#include <vector>

#include "hlgym/battery.hpp"
#include "hlgym/units.hpp"

namespace hlgym::control {

// Backward value iteration over a uniform SoC grid. value[i][k] is the best
// cash flow from step i onward starting at soc_grid[k]; value[n] is zero.
struct DPSolution {
  std::vector<double> soc_grid;
  std::vector<std::vector<double>> value;        // (n + 1) x N
  std::vector<std::vector<std::size_t>> policy;  // n x N, action indices
  double optimal_profit = 0.0;                   // EUR, from initial_soc
  double initial_soc = 0.0;

  std::size_t n_steps() const noexcept { return policy.size(); }
  // Linear interpolation of value[i] at soc; exact on grid points.
  double value_at(std::size_t i, double soc) const;
};

struct DPProblem {
  std::vector<EnergyPrice> prices;  // one per step
  double dt_h = 0.25;
  BatteryParams battery;            // must be ideal
  std::vector<double> action_set_kw{-1.0, 0.0, 1.0};
  double initial_soc = 0.5;
};

// Throws ArgumentError for non-ideal batteries, N < 2, an empty horizon or
// an initial SoC outside [soc_min, soc_max].
DPSolution dp_solve(const DPProblem& problem, std::size_t N = 201);

// Greedy action at an arbitrary SoC, looking one step ahead into the value
// table. Ties go to the idle action, then to the lower index.
std::size_t dp_greedy_action(const DPProblem& problem, const DPSolution& solution, std::size_t i,
                             double soc);

struct Rollout {
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
  std::vector<double> soc;  // after each step
  double profit = 0.0;
};

// Follows dp_greedy_action from the initial SoC on the exact dynamics.
Rollout dp_rollout(const DPProblem& problem, const DPSolution& solution);
// Evaluates a fixed action sequence on the exact dynamics.
Rollout evaluate_actions(const DPProblem& problem, const std::vector<std::size_t>& actions);

}  // namespace hlgym::control
