#include "hlgym/battery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hlgym/errors.hpp"

namespace hlgym {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(std::string("battery params: ") + what);
}

bool tapers(const BatteryParams& p) { return !p.ideal && p.taper; }

}  // namespace

void BatteryParams::validate() const {
  require(std::isfinite(capacity_kwh) && capacity_kwh > 0.0, "capacity_kwh must be > 0");
  require(std::isfinite(p_max_kw) && p_max_kw > 0.0, "p_max_kw must be > 0");
  require(eta_charge > 0.0 && eta_charge <= 1.0, "eta_charge must be in (0,1]");
  require(eta_discharge > 0.0 && eta_discharge <= 1.0, "eta_discharge must be in (0,1]");
  require(taper_start_soc > 0.0 && taper_start_soc < 1.0, "taper_start_soc must be in (0,1)");
  require(soc_min >= 0.0 && soc_min < 1.0, "soc_min must be in [0,1)");
  require(soc_max > 0.0 && soc_max <= 1.0, "soc_max must be in (0,1]");
  require(soc_min < soc_max, "soc_min must be < soc_max");
  require(taper_start_soc < soc_max, "taper_start_soc must be < soc_max");
  require(std::isfinite(tracking_noise_std_kw) && tracking_noise_std_kw >= 0.0,
          "tracking_noise_std_kw must be >= 0");
}

PowerKW battery_available_charge_kw(const BatteryParams& p, double soc) {
  if (soc >= p.soc_max) return PowerKW(0.0);
  if (!tapers(p) || soc <= p.taper_start_soc) return PowerKW(p.p_max_kw);
  const double fraction = std::clamp((p.soc_max - soc) / (p.soc_max - p.taper_start_soc), 0.0, 1.0);
  return PowerKW(p.p_max_kw * fraction);
}

PowerKW battery_available_discharge_kw(const BatteryParams& p, double soc) {
  return PowerKW(soc > p.soc_min ? p.p_max_kw : 0.0);
}

double battery_soc_delta(const BatteryParams& p, double delivered_kw, double dt_h) {
  if (delivered_kw >= 0.0) return p.eta_charge * delivered_kw * dt_h / p.capacity_kwh;
  return delivered_kw * dt_h / (p.eta_discharge * p.capacity_kwh);
}

BatteryStepResult battery_step(const BatteryParams& p, const BatteryState& state,
                               PowerKW setpoint, double dt_h, double noise_draw) {
  if (!(dt_h > 0.0) || !std::isfinite(dt_h)) throw ArgumentError("battery_step: dt_h must be > 0");
  const double sp = setpoint.kw();
  double delivered = 0.0;
  if (sp > 0.0) {
    const double avail = battery_available_charge_kw(p, state.soc).kw();
    delivered = std::min(sp, avail);
    if (!p.ideal) delivered = std::clamp(delivered + p.tracking_noise_std_kw * noise_draw, 0.0, avail);
  } else if (sp < 0.0) {
    const double avail = battery_available_discharge_kw(p, state.soc).kw();
    delivered = -std::min(-sp, avail);
    if (!p.ideal) delivered = std::clamp(delivered + p.tracking_noise_std_kw * noise_draw, -avail, 0.0);
  }

  double soc = state.soc + battery_soc_delta(p, delivered, dt_h);
  if (soc > p.soc_max) {
    delivered = std::max(0.0, (p.soc_max - state.soc) * p.capacity_kwh / (p.eta_charge * dt_h));
    soc = p.soc_max;
  } else if (soc < p.soc_min) {
    delivered = std::min(0.0, -(state.soc - p.soc_min) * p.eta_discharge * p.capacity_kwh / dt_h);
    soc = p.soc_min;
  }
  const PowerKW out(delivered);
  return {BatteryState{soc, out}, out};
}

}  // namespace hlgym
