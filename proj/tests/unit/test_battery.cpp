#include <gtest/gtest.h>

#include <cmath>

#include "hlgym/battery.hpp"
#include "hlgym/errors.hpp"
#include "hlgym/random.hpp"
#include "hlgym/thermal.hpp"
#include "hlgym/trace.hpp"

using namespace hlgym;

namespace {

BatteryParams non_ideal() {
  BatteryParams p;
  p.p_max_kw = 2.5;
  p.taper_start_soc = 0.8;
  p.soc_max = 1.0;
  return p;
}

}  // namespace

TEST(BatteryAvailableCharge, FullPowerBelowTaper) {
  EXPECT_DOUBLE_EQ(battery_available_charge_kw(non_ideal(), 0.5).kw(), 2.5);
}

TEST(BatteryAvailableCharge, LinearTaper) {
  // 2.5 * (1.0 - 0.95) / (1.0 - 0.8)
  EXPECT_NEAR(battery_available_charge_kw(non_ideal(), 0.95).kw(), 0.625, 1e-12);
}

TEST(BatteryAvailableCharge, FullBatteryAcceptsNothing) {
  EXPECT_EQ(battery_available_charge_kw(non_ideal(), 1.0).kw(), 0.0);
  EXPECT_EQ(battery_available_charge_kw(BatteryParams::ideal_defaults(), 1.0).kw(), 0.0);
  EXPECT_EQ(battery_available_charge_kw(BatteryParams::ideal_defaults(), 0.99).kw(), 2.5);
}

TEST(BatteryAvailableCharge, NonIncreasingInSoc) {
  for (const auto& p : {non_ideal(), BatteryParams::ideal_defaults()}) {
    double prev = battery_available_charge_kw(p, 0.0).kw();
    for (int i = 1; i <= 10000; ++i) {
      const double a = battery_available_charge_kw(p, i / 10000.0).kw();
      ASSERT_LE(a, prev);
      prev = a;
    }
  }
}

TEST(BatteryStep, IdealSingleStep) {
  auto p = BatteryParams::ideal_defaults();
  p.capacity_kwh = 10;
  p.eta_charge = 0.95;
  // 0.5 + 0.95 * 1 kW * 0.25 h / 10 kWh
  const auto r = battery_step(p, {0.5, PowerKW()}, PowerKW(1.0), 0.25);
  EXPECT_NEAR(r.state.soc, 0.52375, 1e-15);
  EXPECT_EQ(r.delivered.kw(), 1.0);
}

TEST(BatteryStep, IdleIsIdentity) {
  for (const auto& p : {non_ideal(), BatteryParams::ideal_defaults()}) {
    const auto r = battery_step(p, {0.5, PowerKW()}, PowerKW(0.0), 0.25, 1.7);
    EXPECT_EQ(r.state.soc, 0.5);
    EXPECT_EQ(r.delivered.kw(), 0.0);
  }
}

TEST(BatteryStep, TaperDeliversBelowSetpoint) {
  const auto r = battery_step(non_ideal(), {0.95, PowerKW()}, PowerKW(1.0), 0.25, 0.0);
  EXPECT_NEAR(r.delivered.kw(), 0.625, 1e-12);
  EXPECT_LT(r.delivered.kw(), 1.0);
}

TEST(BatteryStep, NoiseNeverFlipsSign) {
  const auto p = non_ideal();
  const auto charge = battery_step(p, {0.5, PowerKW()}, PowerKW(0.01), 0.25, -50.0);
  EXPECT_EQ(charge.delivered.kw(), 0.0);
  const auto discharge = battery_step(p, {0.5, PowerKW()}, PowerKW(-0.01), 0.25, 50.0);
  EXPECT_EQ(discharge.delivered.kw(), 0.0);
  const auto capped = battery_step(p, {0.5, PowerKW()}, PowerKW(2.5), 0.25, 10.0);
  EXPECT_EQ(capped.delivered.kw(), 2.5);
}

TEST(BatteryStep, CurtailsPowerAtBounds) {
  auto p = BatteryParams::ideal_defaults();
  const auto top = battery_step(p, {0.99, PowerKW()}, PowerKW(2.5), 1.0);
  EXPECT_EQ(top.state.soc, 1.0);
  EXPECT_NEAR(top.delivered.kw(), 0.01 * 10 / 0.95, 1e-12);
  const auto bottom = battery_step(p, {0.06, PowerKW()}, PowerKW(-2.5), 1.0);
  EXPECT_EQ(bottom.state.soc, 0.05);
  EXPECT_NEAR(bottom.delivered.kw(), -0.01 * 10 * 0.95, 1e-12);
  EXPECT_EQ(battery_step(p, {0.05, PowerKW()}, PowerKW(-1), 1.0).delivered.kw(), 0.0);
}

TEST(BatteryStep, RejectsBadArguments) {
  EXPECT_THROW(PowerKW(std::nan("")), ArgumentError);
  EXPECT_THROW(battery_step(non_ideal(), {0.5, PowerKW()}, PowerKW(1.0), 0.0), ArgumentError);
}

TEST(BatteryStep, IdealTracksSetpointExactlyAwayFromBounds) {
  const auto p = BatteryParams::ideal_defaults();
  Rng rng(Seed{3});
  for (int i = 0; i < 10000; ++i) {
    const double soc = rng.uniform(0.3, 0.7);
    const double sp = rng.uniform(-p.p_max_kw, p.p_max_kw);
    const auto r = battery_step(p, {soc, PowerKW()}, PowerKW(sp), 0.25);
    ASSERT_EQ(r.delivered.kw(), sp);
  }
}

TEST(BatteryStep, FuzzSocStaysInBoundsAndEnergyCloses) {
  for (const auto& p : {non_ideal(), BatteryParams::ideal_defaults()}) {
    Rng rng(Seed{99});
    BatteryState s{0.5, PowerKW()};
    double charged = 0.0;     // eta_ch * E_charge
    double discharged = 0.0;  // E_discharge / eta_dis
    for (int i = 0; i < 10000; ++i) {
      const double sp = rng.uniform(-5.0, 5.0);
      const auto r = battery_step(p, s, PowerKW(sp), 0.25, rng.normal());
      ASSERT_GE(r.state.soc, p.soc_min);
      ASSERT_LE(r.state.soc, p.soc_max);
      const double e = r.delivered.kw() * 0.25;
      if (e > 0) charged += p.eta_charge * e;
      else discharged += -e / p.eta_discharge;
      s = r.state;
    }
    const double expected = (charged - discharged) / p.capacity_kwh;
    EXPECT_NEAR(s.soc - 0.5, expected, 1e-9 * std::max(1.0, std::abs(expected)));
  }
}

TEST(BatteryParams, Validation) {
  BatteryParams p;
  EXPECT_NO_THROW(p.validate());
  p.taper_start_soc = 1.0;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = BatteryParams{};
  p.soc_min = 0.9;
  p.soc_max = 0.8;
  EXPECT_THROW(p.validate(), ArgumentError);
}

TEST(Thermal, EulerStep) {
  ThermalParams p;
  p.t_ambient_c = 8;
  p.tau_h = 20;
  p.heat_rate_k_per_h = 2;
  // 18 + 0.25 * ((8 - 18) / 20 + 2)
  const auto s = thermal_step(p, {18.0, true}, 0.25);
  EXPECT_NEAR(s.temp_c, 18.375, 1e-12);
  EXPECT_TRUE(s.heater_on);
}

TEST(Thermal, HeaterStaysOnBelowBand) {
  ThermalParams p;
  p.setpoint_c = 20;
  p.hysteresis_c = 0.5;
  EXPECT_TRUE(thermal_step(p, {18.375, true}, 0.01).heater_on);
}

TEST(Thermal, EquilibriumWhenOffAtAmbient) {
  ThermalParams p;
  p.setpoint_c = 5.0;  // ambient 8 is above the band, heater stays off
  const auto s = thermal_step(p, {8.0, false}, 0.25);
  EXPECT_EQ(s.temp_c, 8.0);
  EXPECT_FALSE(s.heater_on);
}

TEST(Thermal, RejectsUnstableStep) {
  ThermalParams p;
  EXPECT_THROW(thermal_step(p, {18.0, true}, p.tau_h / 4 + 0.01), ArgumentError);
}

TEST(Thermal, HysteresisCyclesStayInBand) {
  ThermalParams p;
  const double dt = 10.0 / 3600.0;
  const double eps = thermal_overshoot_bound(p, dt);
  ThermalState s{18.0, true};
  int switches = 0;
  bool settled = false;
  for (int i = 0; i < 48 * 360; ++i) {
    const auto n = thermal_step(p, s, dt);
    if (n.heater_on != s.heater_on) {
      ++switches;
      settled = true;
    }
    s = n;
    if (settled) {
      ASSERT_GE(s.temp_c, p.setpoint_c - p.hysteresis_c - eps);
      ASSERT_LE(s.temp_c, p.setpoint_c + p.hysteresis_c + eps);
    }
  }
  EXPECT_GE(switches / 2, 3);
}

TEST(Meter, NetPower) {
  EXPECT_NEAR(meter_net_kw(PowerKW(0.4), PowerKW(-1.2), PowerKW(1.0)).kw(), 0.2, 1e-12);
  EXPECT_EQ(meter_net_kw(PowerKW(0), PowerKW(0), PowerKW(0)).kw(), 0.0);
  EXPECT_EQ(meter_net_kw(PowerKW(0.5), PowerKW(0), PowerKW(-0.5)).kw(), 0.0);
}

TEST(TraceSample, ZeroOrderHold) {
  const TimeGrid g3(make_utc(2023, 1, 1), 900, 3);
  const Trace t(g3, {PowerKW(0), PowerKW(-1.2), PowerKW(-0.8)}, TraceKind::pv);
  EXPECT_EQ(trace_sample(t, 1).kw(), -1.2);
  EXPECT_THROW(trace_sample(t, 3), RangeError);
  const TimeGrid g96(make_utc(2023, 1, 1), 900, 96);
  const Trace c(g96, std::vector<PowerKW>(96, PowerKW(0.4)), TraceKind::load);
  EXPECT_EQ(trace_sample(c, 50).kw(), 0.4);
  EXPECT_THROW(Trace(g3, {PowerKW(0), PowerKW(1.0), PowerKW(0)}, TraceKind::pv), ArgumentError);
}
