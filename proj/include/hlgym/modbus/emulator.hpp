#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <span>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hlgym/battery.hpp"
#include "hlgym/modbus/registers.hpp"
#include "hlgym/net/socket.hpp"
#include "hlgym/random.hpp"
#include "hlgym/thermal.hpp"
#include "hlgym/time_grid.hpp"
#include "hlgym/trace.hpp"

namespace hlgym::modbus {

struct EmulatorConfig {
  RegisterMap map = default_register_map();
  BatteryParams battery;
  ThermalParams thermal;
  // Replayed cyclically; synthetic traces are used when absent.
  std::optional<Trace> pv;
  std::optional<Trace> load;
  Timestamp start = make_utc(2023, 1, 1);
  double initial_soc = 0.5;
  ThermalState initial_thermal;
  double tick_s = 10.0;
  double time_scale = 3600.0;
  Seed seed;
  std::uint16_t port = 15020;
  bool any_interface = false;

  void validate() const;
};

// Snapshot of the emulated plant in engineering units.
struct PlantSnapshot {
  std::uint64_t ticks = 0;
  Timestamp now;
  double soc = 0.0;
  double delivered_kw = 0.0;
  double setpoint_kw = 0.0;
  double temp_c = 0.0;
  bool heater_on = false;
  double thermostat_setpoint_c = 0.0;
  double pv_kw = 0.0;
  double load_kw = 0.0;
  double grid_kw = 0.0;
  double charge_energy_wh = 0.0;
  double discharge_energy_wh = 0.0;
};

// The emulated hardware itself: register file plus non-ideal asset models,
// advanced one tick at a time. Not thread-safe; EmulatorServer serializes
// every access.
class EmulatorModel {
 public:
  explicit EmulatorModel(EmulatorConfig config);

  void tick();
  // Handles one request PDU and returns the response PDU (normal or exception).
  std::vector<std::uint8_t> handle(std::span<const std::uint8_t> request);

  std::uint16_t read_raw(std::uint16_t address) const;
  PlantSnapshot snapshot() const;
  const EmulatorConfig& config() const noexcept { return config_; }

 private:
  double pv_kw() const;
  double load_kw() const;
  double register_value(std::string_view name) const;
  std::uint16_t raw_of(const RegisterSpec& spec) const;
  void write_raw(const RegisterSpec& spec, std::uint16_t raw);

  EmulatorConfig config_;
  Trace pv_;
  Trace load_;
  Rng noise_;
  std::uint64_t ticks_ = 0;
  BatteryState battery_;
  ThermalState thermal_;
  double setpoint_kw_ = 0.0;
  std::uint16_t setpoint_raw_ = 0;
  std::uint16_t thermostat_raw_ = 0;
  double charge_wh_ = 0.0;
  double discharge_wh_ = 0.0;
  std::map<std::uint16_t, std::uint16_t> extra_;
};

// MODBUS/TCP server around an EmulatorModel, advancing it on its own clock:
// one tick of tick_s emulated seconds every tick_s / time_scale wall seconds.
class EmulatorServer {
 public:
  using TickObserver = std::function<void(const PlantSnapshot&)>;
  using Diagnostic = std::function<void(const std::string&)>;

  // Throws TransportError when the port is in use.
  static std::unique_ptr<EmulatorServer> start(EmulatorConfig config, TickObserver observer = {},
                                               Diagnostic diagnostic = {});
  ~EmulatorServer();
  EmulatorServer(const EmulatorServer&) = delete;
  EmulatorServer& operator=(const EmulatorServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  PlantSnapshot snapshot() const;
  void stop();

 private:
  EmulatorServer(EmulatorConfig config, TickObserver observer, Diagnostic diagnostic);
  void clock_loop();
  void accept_loop();
  void serve_connection(std::shared_ptr<net::Socket> socket);

  mutable std::mutex model_mutex_;
  EmulatorModel model_;
  TickObserver observer_;
  Diagnostic diagnostic_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex stop_mutex_;
  std::condition_variable stop_cv_;
  std::thread clock_thread_;
  std::thread accept_thread_;
  std::mutex connections_mutex_;
  std::vector<std::shared_ptr<net::Socket>> connections_;
  std::vector<std::thread> connection_threads_;
};

inline std::unique_ptr<EmulatorServer> emulator_serve(EmulatorConfig config) {
  return EmulatorServer::start(std::move(config));
}

}  // namespace hlgym::modbus
