#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "hlgym/battery.hpp"
#include "hlgym/modbus/client.hpp"
#include "hlgym/modbus/registers.hpp"
#include "hlgym/random.hpp"
#include "hlgym/thermal.hpp"
#include "hlgym/time_grid.hpp"
#include "hlgym/trace.hpp"
#include "hlgym/units.hpp"

namespace hlgym::env {

struct BackendObservation {
  double soc = 0.0;
  PowerKW delivered;  // average over the last advanced step
  double temp_c = 0.0;
  PowerKW pv;
  PowerKW load;
};

// Source of plant dynamics for an environment: either an in-process model
// or real (emulated) hardware.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string kind() const = 0;
  // Starts an episode on `grid`. Simulated backends set the battery to
  // initial_soc; hardware cannot be teleported and keeps its state.
  virtual void reset(const TimeGrid& grid, double initial_soc, Seed seed) = 0;
  virtual void apply_setpoint(PowerKW setpoint) = 0;
  // Blocks until the plant has moved on by one grid step.
  virtual void advance() = 0;
  virtual BackendObservation observe() const = 0;
};

// In-process plant: one battery_step per grid step, thermal model sub-stepped
// at one minute.
class SimBackend final : public Backend {
 public:
  explicit SimBackend(BatteryParams battery, ThermalParams thermal = {},
                      ThermalState initial_thermal = {});

  std::string kind() const override { return battery_.ideal ? "sim-ideal" : "sim"; }
  void reset(const TimeGrid& grid, double initial_soc, Seed seed) override;
  void apply_setpoint(PowerKW setpoint) override { setpoint_ = setpoint; }
  void advance() override;
  BackendObservation observe() const override;

  const BatteryParams& battery() const noexcept { return battery_; }

 private:
  BatteryParams battery_;
  ThermalParams thermal_params_;
  ThermalState initial_thermal_;
  std::optional<TimeGrid> grid_;
  std::optional<Trace> pv_;
  std::optional<Trace> load_;
  std::optional<Rng> noise_;
  std::int64_t step_ = 0;
  BatteryState state_;
  ThermalState thermal_;
  PowerKW setpoint_;
};

struct ModbusBackendOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 15020;
  modbus::RegisterMap map = modbus::default_register_map();
  // Must match the emulator: used to turn grid steps into heartbeat ticks
  // and to pace polling.
  double tick_s = 10.0;
  double time_scale = 3600.0;
  std::chrono::milliseconds timeout{2000};
};

// Plant behind MODBUS/TCP. Step boundaries are counted on the emulator's
// heartbeat register; delivered power is the average derived from the
// charge/discharge energy counters over the step window.
class ModbusBackend final : public Backend {
 public:
  explicit ModbusBackend(ModbusBackendOptions options);

  std::string kind() const override { return "modbus"; }
  void reset(const TimeGrid& grid, double initial_soc, Seed seed) override;
  void apply_setpoint(PowerKW setpoint) override;
  void advance() override;
  BackendObservation observe() const override;

 private:
  struct Sample {
    std::uint16_t heartbeat = 0;
    std::uint16_t charge_raw = 0;
    std::uint16_t discharge_raw = 0;
    double soc = 0.0;
    double temp_c = 0.0;
    double pv_kw = 0.0;
    double load_kw = 0.0;
  };

  Sample read_sample();
  modbus::Client& client();

  ModbusBackendOptions options_;
  mutable std::mutex io_mutex_;
  std::unique_ptr<modbus::Client> client_;
  std::int64_t ticks_per_step_ = 0;
  std::uint64_t ticks_ = 0;  // unwrapped heartbeat
  std::uint64_t boundary_ = 0;
  Sample last_;
  double last_delivered_kw_ = 0.0;
  std::uint16_t block_start_ = 0;
  std::uint16_t block_count_ = 0;
};

}  // namespace hlgym::env
