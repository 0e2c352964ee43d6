#pragma once

namespace hlgym {

// First-order RC room heated by an on/off heat pump under a hysteresis
// thermostat.
struct ThermalParams {
  double tau_h = 20.0;
  double heat_rate_k_per_h = 2.0;
  double t_ambient_c = 8.0;
  double hysteresis_c = 0.5;
  double setpoint_c = 20.0;

  void validate() const;
};

struct ThermalState {
  double temp_c = 18.0;
  bool heater_on = true;
};

// One explicit-Euler step followed by the thermostat decision. Requires
// dt_h <= tau_h / 4.
ThermalState thermal_step(const ThermalParams& params, const ThermalState& state, double dt_h);

// Worst-case overshoot past the hysteresis band caused by discretization.
double thermal_overshoot_bound(const ThermalParams& params, double dt_h);

}  // namespace hlgym
