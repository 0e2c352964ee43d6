#pragma once

#include "hlgym/units.hpp"

namespace hlgym {

// Residential battery parameters. The defaults describe a typical 10 kWh
// home ESS whose charge acceptance tapers linearly above taper_start_soc.
struct BatteryParams {
  double capacity_kwh = 10.0;
  double p_max_kw = 2.5;
  double eta_charge = 0.95;
  double eta_discharge = 0.95;
  double taper_start_soc = 0.8;
  double soc_min = 0.05;
  double soc_max = 1.0;
  // Ideal variant: no taper, no tracking noise.
  bool ideal = false;
  // Lets the taper be switched off on its own while keeping tracking noise.
  bool taper = true;
  double tracking_noise_std_kw = 0.05;

  // Throws ArgumentError on the first violated invariant.
  void validate() const;

  static BatteryParams ideal_defaults() {
    BatteryParams p;
    p.ideal = true;
    return p;
  }
};

struct BatteryState {
  double soc = 0.5;
  PowerKW last_delivered;
};

struct BatteryStepResult {
  BatteryState state;
  PowerKW delivered;
};

// Largest charging power the battery accepts at `soc`.
PowerKW battery_available_charge_kw(const BatteryParams& params, double soc);
// Largest discharging power (as a positive magnitude) at `soc`; hard cutoff at soc_min.
PowerKW battery_available_discharge_kw(const BatteryParams& params, double soc);

// Advances the battery by dt_h hours under `setpoint`. noise_draw is a
// standard-normal sample scaled by tracking_noise_std_kw on the non-ideal
// variant and ignored otherwise. Power is curtailed so the state of charge
// lands inside [soc_min, soc_max] without discarding stored energy.
BatteryStepResult battery_step(const BatteryParams& params, const BatteryState& state,
                               PowerKW setpoint, double dt_h, double noise_draw = 0.0);

// State-of-charge change caused by delivering `delivered` for dt_h hours.
double battery_soc_delta(const BatteryParams& params, double delivered_kw, double dt_h);

}  // namespace hlgym
