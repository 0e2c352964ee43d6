#include "hlgym/env/backend.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "hlgym/errors.hpp"

namespace hlgym::env {

namespace {

double cyclic_kw(const Trace& trace, Timestamp t) {
  const auto& g = trace.grid();
  std::int64_t i = (t - g.start()).count() / g.step_seconds();
  i %= g.n_steps();
  if (i < 0) i += g.n_steps();
  return trace.sample(i).kw();
}

}  // namespace

SimBackend::SimBackend(BatteryParams battery, ThermalParams thermal, ThermalState initial_thermal)
    : battery_(battery), thermal_params_(thermal), initial_thermal_(initial_thermal) {
  battery_.validate();
  thermal_params_.validate();
}

void SimBackend::reset(const TimeGrid& grid, double initial_soc, Seed seed) {
  if (!(initial_soc >= battery_.soc_min && initial_soc <= battery_.soc_max)) {
    throw ConfigError("initial soc outside [soc_min, soc_max]");
  }
  const bool new_day_grid = !grid_ || grid_->start() != grid.start();
  grid_ = grid;
  if (new_day_grid) {
    const TimeGrid day(std::chrono::floor<std::chrono::days>(grid.start()), 900, 96);
    pv_ = synthetic_pv_trace(day);
    load_ = synthetic_load_trace(day, seed);
  }
  noise_ = Rng::derived(seed, 0x5b);
  step_ = 0;
  state_ = BatteryState{initial_soc, PowerKW(0.0)};
  thermal_ = initial_thermal_;
  setpoint_ = PowerKW(0.0);
}

void SimBackend::advance() {
  if (!grid_) throw LifecycleError("sim backend advanced before reset");
  const double dt_h = grid_->step_hours();
  const double draw = noise_->normal();
  state_ = battery_step(battery_, state_, setpoint_, dt_h, draw).state;
  const int substeps = std::max<int>(1, static_cast<int>(std::ceil(dt_h * 60.0)));
  for (int k = 0; k < substeps; ++k) thermal_ = thermal_step(thermal_params_, thermal_, dt_h / substeps);
  ++step_;
}

BackendObservation SimBackend::observe() const {
  if (!grid_) throw LifecycleError("sim backend observed before reset");
  const Timestamp now = grid_->timestamp_of(std::min(step_, grid_->n_steps()));
  return {state_.soc, state_.last_delivered, thermal_.temp_c, PowerKW(cyclic_kw(*pv_, now)),
          PowerKW(cyclic_kw(*load_, now))};
}

// -- MODBUS ------------------------------------------------------------------

ModbusBackend::ModbusBackend(ModbusBackendOptions options) : options_(std::move(options)) {
  const auto& m = options_.map;
  std::uint16_t lo = 0xFFFF, hi = 0;
  for (auto name : {modbus::reg::soc, modbus::reg::room_temp, modbus::reg::pv_power, modbus::reg::load_power,
                    modbus::reg::heartbeat, modbus::reg::charge_energy, modbus::reg::discharge_energy}) {
    const auto a = m.at(name).address;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  for (std::uint32_t a = lo; a <= hi; ++a) {
    if (!m.find(static_cast<std::uint16_t>(a))) {
      throw ConfigError("MODBUS backend needs a contiguous register block");
    }
  }
  if (hi - lo + 1 > modbus::max_read_count) throw ConfigError("MODBUS register block too large");
  block_start_ = lo;
  block_count_ = static_cast<std::uint16_t>(hi - lo + 1);
  if (!(options_.tick_s > 0) || !(options_.time_scale >= 1)) throw ConfigError("bad MODBUS backend timing");
}

modbus::Client& ModbusBackend::client() {
  if (!client_) {
    client_ = std::make_unique<modbus::Client>(options_.host, options_.port, options_.map.unit_id(),
                                               options_.timeout);
  }
  return *client_;
}

ModbusBackend::Sample ModbusBackend::read_sample() {
  std::vector<std::uint16_t> raw;
  try {
    raw = client().read_holding(block_start_, block_count_);
  } catch (const TransportError&) {
    client_.reset();
    throw;
  }
  const auto& m = options_.map;
  auto at = [&](std::string_view name) { return raw[m.at(name).address - block_start_]; };
  auto value = [&](std::string_view name) { return modbus::decode_value(m.at(name), at(name)); };
  Sample s;
  s.heartbeat = at(modbus::reg::heartbeat);
  s.charge_raw = at(modbus::reg::charge_energy);
  s.discharge_raw = at(modbus::reg::discharge_energy);
  s.soc = std::clamp(value(modbus::reg::soc) / 100.0, 0.0, 1.0);
  s.temp_c = value(modbus::reg::room_temp);
  s.pv_kw = value(modbus::reg::pv_power);
  s.load_kw = value(modbus::reg::load_power);
  return s;
}

void ModbusBackend::reset(const TimeGrid& grid, double, Seed) {
  const double ticks = static_cast<double>(grid.step_seconds()) / options_.tick_s;
  if (std::abs(ticks - std::round(ticks)) > 1e-9 || ticks < 1) {
    throw ConfigError("grid step must be a whole number of emulator ticks");
  }
  std::lock_guard lock(io_mutex_);
  ticks_per_step_ = static_cast<std::int64_t>(std::round(ticks));
  last_ = read_sample();
  ticks_ = last_.heartbeat;
  boundary_ = ticks_;
  last_delivered_kw_ = 0.0;
}

void ModbusBackend::apply_setpoint(PowerKW setpoint) {
  std::lock_guard lock(io_mutex_);
  const auto& spec = options_.map.at(modbus::reg::battery_setpoint);
  try {
    client().write_register(spec.address, modbus::encode_value(spec, setpoint.kw()));
  } catch (const TransportError&) {
    client_.reset();
    throw;
  }
}

void ModbusBackend::advance() {
  std::lock_guard lock(io_mutex_);
  if (ticks_per_step_ == 0) throw LifecycleError("MODBUS backend advanced before reset");
  boundary_ += static_cast<std::uint64_t>(ticks_per_step_);
  const auto tick_wall = std::chrono::duration<double>(options_.tick_s / options_.time_scale);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            tick_wall * static_cast<double>(ticks_per_step_) * 4.0) +
                        options_.timeout;
  Sample s = last_;
  std::uint64_t ticks = ticks_;
  while (true) {
    s = read_sample();
    ticks += static_cast<std::uint16_t>(s.heartbeat - static_cast<std::uint16_t>(ticks & 0xFFFF));
    if (ticks >= boundary_) break;
    if (std::chrono::steady_clock::now() > deadline) {
      throw TransportError("emulator heartbeat stalled");
    }
    const auto remaining = tick_wall * static_cast<double>(boundary_ - ticks);
    const auto nap = remaining > tick_wall * 2.0 ? remaining - tick_wall * 1.5 : tick_wall / 8.0;
    std::this_thread::sleep_for(nap);
  }
  const std::uint64_t elapsed = ticks - ticks_;
  const auto& m = options_.map;
  const double ch_wh = static_cast<std::uint16_t>(s.charge_raw - last_.charge_raw) *
                       m.at(modbus::reg::charge_energy).scale;
  const double dis_wh = static_cast<std::uint16_t>(s.discharge_raw - last_.discharge_raw) *
                        m.at(modbus::reg::discharge_energy).scale;
  const double hours = static_cast<double>(elapsed) * options_.tick_s / 3600.0;
  last_delivered_kw_ = elapsed == 0 ? 0.0 : (ch_wh - dis_wh) / 1000.0 / hours;
  ticks_ = ticks;
  last_ = s;
}

BackendObservation ModbusBackend::observe() const {
  std::lock_guard lock(io_mutex_);
  return {last_.soc, PowerKW(last_delivered_kw_), last_.temp_c, PowerKW(last_.pv_kw),
          PowerKW(last_.load_kw)};
}

}  // namespace hlgym::env
