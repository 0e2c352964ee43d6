#include "hlgym/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hlgym/errors.hpp"

namespace hlgym {

void ThermalParams::validate() const {
  if (!(tau_h > 0.0)) throw ArgumentError("thermal params: tau_h must be > 0");
  if (!(heat_rate_k_per_h > 0.0)) throw ArgumentError("thermal params: heat_rate must be > 0");
  if (!(hysteresis_c > 0.0 && hysteresis_c < 5.0)) {
    throw ArgumentError("thermal params: hysteresis_c must be in (0,5)");
  }
  if (!std::isfinite(t_ambient_c) || !std::isfinite(setpoint_c)) {
    throw ArgumentError("thermal params: temperatures must be finite");
  }
}

ThermalState thermal_step(const ThermalParams& p, const ThermalState& s, double dt_h) {
  if (!(dt_h > 0.0) || dt_h > p.tau_h / 4.0) {
    throw ArgumentError("thermal_step: dt_h " + std::to_string(dt_h) +
                        " h violates 0 < dt_h <= tau_h/4");
  }
  const double heating = s.heater_on ? p.heat_rate_k_per_h : 0.0;
  ThermalState next;
  next.temp_c = s.temp_c + dt_h * ((p.t_ambient_c - s.temp_c) / p.tau_h + heating);
  next.temp_c = std::clamp(next.temp_c, -30.0, 60.0);
  if (next.temp_c < p.setpoint_c - p.hysteresis_c) {
    next.heater_on = true;
  } else if (next.temp_c > p.setpoint_c + p.hysteresis_c) {
    next.heater_on = false;
  } else {
    next.heater_on = s.heater_on;
  }
  return next;
}

double thermal_overshoot_bound(const ThermalParams& p, double dt_h) {
  return dt_h * std::max(p.heat_rate_k_per_h, (p.setpoint_c - p.t_ambient_c) / p.tau_h);
}

}  // namespace hlgym
