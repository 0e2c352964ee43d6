#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <vector>

namespace hlgym::oracle {

// Exhaustive search over every action sequence for a lossless battery whose
// per-step SoC moves are exact binary fractions (e.g. cap 2 kWh, 1 kW, 1 h).
// Dynamics are written out here rather than taken from battery_step: clamp
// to [soc_min, soc_max] and settle what was actually delivered. Rewards are
// summed right to left, the same association as backward induction, so the
// optimum is comparable bit for bit.
struct BruteForce {
  double capacity_kwh = 2.0;
  double dt_h = 1.0;
  double soc_min = 0.0;
  double soc_max = 1.0;
  std::vector<double> actions_kw{-1.0, 0.0, 1.0};

  double best(const std::vector<double>& prices, double soc0, std::vector<std::size_t>* argmax = nullptr) const {
    const std::size_t n = prices.size();
    std::vector<std::size_t> seq(n, 0);
    double best_profit = -INFINITY;
    while (true) {
      double soc = soc0;
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) {
        double target = soc + actions_kw[seq[i]] * dt_h / capacity_kwh;
        target = std::fmin(std::fmax(target, soc_min), soc_max);
        const double delivered = (target - soc) * capacity_kwh / dt_h;
        r[i] = -prices[i] * delivered * dt_h / 1000.0;
        soc = target;
      }
      double total = 0.0;
      for (std::size_t i = n; i-- > 0;) total = r[i] + total;
      if (total > best_profit) {
        best_profit = total;
        if (argmax) *argmax = seq;
      }
      std::size_t k = 0;
      while (k < n && ++seq[k] == actions_kw.size()) seq[k++] = 0;
      if (k == n) break;
    }
    return best_profit;
  }
};

// Hour-of-day bins the observation's clock features must decode to.
inline std::size_t hour_of(std::int64_t step, std::int64_t step_s) {
  return static_cast<std::size_t>((step * step_s / 3600) % 24);
}

}  // namespace hlgym::oracle
