#include "hlgym/modbus/emulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>

#include "hlgym/errors.hpp"
#include "hlgym/modbus/frame.hpp"

namespace hlgym::modbus {

namespace {

constexpr std::string_view required_registers[] = {
    reg::soc,       reg::battery_power, reg::battery_setpoint, reg::room_temp,
    reg::thermostat_setpoint, reg::pv_power, reg::load_power, reg::grid_power,
    reg::heartbeat, reg::charge_energy, reg::discharge_energy};

std::uint16_t saturating_encode(const RegisterSpec& spec, double value) {
  try {
    return encode_value(spec, value);
  } catch (const EncodeError&) {
    if (spec.kind == RegisterKind::u16) return value < 0 ? 0 : 0xFFFF;
    return value < 0 ? static_cast<std::uint16_t>(0x8000) : 0x7FFF;
  }
}

double cyclic_sample(const Trace& trace, Timestamp now) {
  const auto& g = trace.grid();
  const std::int64_t offset = (now - g.start()).count();
  std::int64_t i = offset >= 0 ? offset / g.step_seconds() : -((-offset + g.step_seconds() - 1) / g.step_seconds());
  i %= g.n_steps();
  if (i < 0) i += g.n_steps();
  return trace.sample(i).kw();
}

TimeGrid day_grid(Timestamp start) { return TimeGrid(start, 900, 96); }

}  // namespace

void EmulatorConfig::validate() const {
  battery.validate();
  thermal.validate();
  for (auto name : required_registers) {
    if (!map.contains(name)) {
      throw ConfigError("register map lacks required register '" + std::string(name) + "'");
    }
  }
  if (map.at(reg::battery_setpoint).access != Access::read_write ||
      map.at(reg::thermostat_setpoint).access != Access::read_write) {
    throw ConfigError("setpoint registers must be read_write");
  }
  if (!(tick_s > 0.0 && tick_s <= 60.0)) throw ConfigError("emulator tick must be in (0, 60] s");
  if (!(time_scale >= 1.0)) throw ConfigError("emulator time_scale must be >= 1");
  if (!(initial_soc >= battery.soc_min && initial_soc <= battery.soc_max)) {
    throw ConfigError("emulator initial soc outside [soc_min, soc_max]");
  }
  if (tick_s / 3600.0 > thermal.tau_h / 4.0) throw ConfigError("emulator tick too long for thermal model");
}

EmulatorModel::EmulatorModel(EmulatorConfig config)
    : config_((config.validate(), std::move(config))),
      pv_(config_.pv ? *config_.pv : synthetic_pv_trace(day_grid(config_.start))),
      load_(config_.load ? *config_.load : synthetic_load_trace(day_grid(config_.start), config_.seed)),
      noise_(Rng::derived(config_.seed, 0xe1u)),
      battery_{config_.initial_soc, PowerKW(0.0)},
      thermal_(config_.initial_thermal) {
  setpoint_raw_ = encode_value(config_.map.at(reg::battery_setpoint), 0.0);
  thermostat_raw_ = encode_value(config_.map.at(reg::thermostat_setpoint), config_.thermal.setpoint_c);
}

void EmulatorModel::tick() {
  const double dt_h = config_.tick_s / 3600.0;
  const double draw = noise_.normal();
  const auto step = battery_step(config_.battery, battery_, PowerKW(setpoint_kw_), dt_h, draw);
  battery_ = step.state;
  const double wh = step.delivered.kw() * dt_h * 1000.0;
  if (wh > 0) {
    charge_wh_ += wh;
  } else {
    discharge_wh_ -= wh;
  }
  thermal_ = thermal_step(config_.thermal, thermal_, dt_h);
  ++ticks_;
}

double EmulatorModel::pv_kw() const { return cyclic_sample(pv_, snapshot().now); }
double EmulatorModel::load_kw() const { return cyclic_sample(load_, snapshot().now); }

PlantSnapshot EmulatorModel::snapshot() const {
  PlantSnapshot s;
  s.ticks = ticks_;
  s.now = config_.start +
          std::chrono::seconds(static_cast<std::int64_t>(std::floor(static_cast<double>(ticks_) * config_.tick_s)));
  s.soc = battery_.soc;
  s.delivered_kw = battery_.last_delivered.kw();
  s.setpoint_kw = setpoint_kw_;
  s.temp_c = thermal_.temp_c;
  s.heater_on = thermal_.heater_on;
  s.thermostat_setpoint_c = config_.thermal.setpoint_c;
  s.pv_kw = cyclic_sample(pv_, s.now);
  s.load_kw = cyclic_sample(load_, s.now);
  s.grid_kw = s.load_kw + s.pv_kw + s.delivered_kw;
  s.charge_energy_wh = charge_wh_;
  s.discharge_energy_wh = discharge_wh_;
  return s;
}

std::uint16_t EmulatorModel::raw_of(const RegisterSpec& spec) const {
  const std::string_view name = spec.name;
  if (name == reg::battery_setpoint) return setpoint_raw_;
  if (name == reg::thermostat_setpoint) return thermostat_raw_;
  if (name == reg::heartbeat) return static_cast<std::uint16_t>(ticks_ & 0xFFFF);
  if (name == reg::charge_energy || name == reg::discharge_energy) {
    const double wh = name == reg::charge_energy ? charge_wh_ : discharge_wh_;
    return static_cast<std::uint16_t>(static_cast<std::uint64_t>(std::llround(wh / spec.scale)) & 0xFFFF);
  }
  if (name == reg::soc) return saturating_encode(spec, battery_.soc * 100.0);
  if (name == reg::battery_power) return saturating_encode(spec, battery_.last_delivered.kw());
  if (name == reg::room_temp) return saturating_encode(spec, thermal_.temp_c);
  const PlantSnapshot s = snapshot();
  if (name == reg::pv_power) return saturating_encode(spec, s.pv_kw);
  if (name == reg::load_power) return saturating_encode(spec, s.load_kw);
  if (name == reg::grid_power) return saturating_encode(spec, s.grid_kw);
  const auto it = extra_.find(spec.address);
  return it == extra_.end() ? 0 : it->second;
}

std::uint16_t EmulatorModel::read_raw(std::uint16_t address) const {
  const RegisterSpec* spec = config_.map.find(address);
  if (!spec) throw NotFoundError("unmapped register " + std::to_string(address));
  return raw_of(*spec);
}

void EmulatorModel::write_raw(const RegisterSpec& spec, std::uint16_t raw) {
  if (spec.name == reg::battery_setpoint) {
    setpoint_raw_ = raw;
    setpoint_kw_ = std::clamp(decode_value(spec, raw), -PowerKW::kSanityBound, PowerKW::kSanityBound);
  } else if (spec.name == reg::thermostat_setpoint) {
    thermostat_raw_ = raw;
    config_.thermal.setpoint_c = decode_value(spec, raw);
  } else {
    extra_[spec.address] = raw;
  }
}

std::vector<std::uint8_t> EmulatorModel::handle(std::span<const std::uint8_t> request) {
  if (request.empty()) return exception_pdu(0, ex_illegal_function);
  const std::uint8_t fc = request[0];
  const auto& map = config_.map;
  switch (fc) {
    case fc_read_holding: {
      if (request.size() != 5) return exception_pdu(fc, ex_illegal_value);
      const std::uint16_t address = get_u16(request, 1);
      const std::uint16_t count = get_u16(request, 3);
      if (count < 1 || count > max_read_count) return exception_pdu(fc, ex_illegal_value);
      if (address + count > 0x10000) return exception_pdu(fc, ex_illegal_address);
      std::vector<std::uint8_t> out{fc, static_cast<std::uint8_t>(2 * count)};
      for (std::uint32_t a = address; a < address + count; ++a) {
        const RegisterSpec* spec = map.find(static_cast<std::uint16_t>(a));
        if (!spec) return exception_pdu(fc, ex_illegal_address);
        put_u16(out, raw_of(*spec));
      }
      return out;
    }
    case fc_write_single: {
      if (request.size() != 5) return exception_pdu(fc, ex_illegal_value);
      const RegisterSpec* spec = map.find(get_u16(request, 1));
      if (!spec || spec->access != Access::read_write) return exception_pdu(fc, ex_illegal_address);
      write_raw(*spec, get_u16(request, 3));
      return {request.begin(), request.end()};
    }
    case fc_write_multiple: {
      if (request.size() < 6) return exception_pdu(fc, ex_illegal_value);
      const std::uint16_t address = get_u16(request, 1);
      const std::uint16_t count = get_u16(request, 3);
      if (count < 1 || count > max_write_count || request[5] != 2 * count ||
          request.size() != 6u + 2u * count) {
        return exception_pdu(fc, ex_illegal_value);
      }
      if (address + count > 0x10000) return exception_pdu(fc, ex_illegal_address);
      for (std::uint32_t a = address; a < address + count; ++a) {
        const RegisterSpec* spec = map.find(static_cast<std::uint16_t>(a));
        if (!spec || spec->access != Access::read_write) return exception_pdu(fc, ex_illegal_address);
      }
      for (std::uint16_t k = 0; k < count; ++k) {
        write_raw(*map.find(static_cast<std::uint16_t>(address + k)), get_u16(request, 6 + 2 * k));
      }
      std::vector<std::uint8_t> out{fc};
      put_u16(out, address);
      put_u16(out, count);
      return out;
    }
    default:
      return exception_pdu(fc, ex_illegal_function);
  }
}

// -- server ------------------------------------------------------------------

EmulatorServer::EmulatorServer(EmulatorConfig config, TickObserver observer, Diagnostic diagnostic)
    : model_(std::move(config)), observer_(std::move(observer)), diagnostic_(std::move(diagnostic)) {
  if (!diagnostic_) diagnostic_ = [](const std::string& msg) { std::clog << "emulator: " << msg << '\n'; };
  listener_ = net::Socket::listen(model_.config().port, model_.config().any_interface);
  port_ = listener_.local_port();
}

std::unique_ptr<EmulatorServer> EmulatorServer::start(EmulatorConfig config, TickObserver observer,
                                                      Diagnostic diagnostic) {
  std::unique_ptr<EmulatorServer> server(
      new EmulatorServer(std::move(config), std::move(observer), std::move(diagnostic)));
  server->clock_thread_ = std::thread([s = server.get()] { s->clock_loop(); });
  server->accept_thread_ = std::thread([s = server.get()] { s->accept_loop(); });
  return server;
}

EmulatorServer::~EmulatorServer() { stop(); }

PlantSnapshot EmulatorServer::snapshot() const {
  std::lock_guard lock(model_mutex_);
  return model_.snapshot();
}

void EmulatorServer::stop() {
  if (stopping_.exchange(true)) return;
  {
    std::lock_guard lock(stop_mutex_);
  }
  stop_cv_.notify_all();
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (clock_thread_.joinable()) clock_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(connections_mutex_);
    for (auto& c : connections_) c->shutdown();
    threads.swap(connection_threads_);
  }
  for (auto& t : threads) t.join();
  listener_.close();
}

void EmulatorServer::clock_loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration<double>(model_.config().tick_s / model_.config().time_scale);
  const auto t0 = clock::now();
  std::uint64_t k = 0;
  std::unique_lock stop_lock(stop_mutex_);
  while (!stopping_) {
    ++k;
    const auto due = t0 + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(k));
    if (stop_cv_.wait_until(stop_lock, due, [this] { return stopping_.load(); })) break;
    PlantSnapshot snap;
    {
      std::lock_guard lock(model_mutex_);
      model_.tick();
      if (observer_) snap = model_.snapshot();
    }
    if (observer_) observer_(snap);
  }
}

void EmulatorServer::accept_loop() {
  while (!stopping_) {
    auto client = listener_.accept();
    if (!client) break;
    auto socket = std::make_shared<net::Socket>(std::move(*client));
    std::lock_guard lock(connections_mutex_);
    if (stopping_) break;
    connections_.push_back(socket);
    connection_threads_.emplace_back([this, socket] { serve_connection(socket); });
  }
}

void EmulatorServer::serve_connection(std::shared_ptr<net::Socket> socket) {
  const auto no_timeout = std::chrono::milliseconds(-1);
  try {
    while (!stopping_) {
      std::array<std::uint8_t, mbap_header_size> header{};
      if (!socket->read_exact(header, no_timeout)) break;
      std::size_t pdu_size = 0;
      try {
        pdu_size = frame_pdu_size(header);
      } catch (const ProtocolError& e) {
        diagnostic_(std::string("closing connection after malformed frame: ") + e.what());
        break;
      }
      std::vector<std::uint8_t> frame(header.begin(), header.end());
      frame.resize(mbap_header_size + pdu_size);
      if (!socket->read_exact(std::span(frame).subspan(mbap_header_size), no_timeout)) break;
      const MbapFrame request = parse_frame(frame);
      std::vector<std::uint8_t> response;
      {
        std::lock_guard lock(model_mutex_);
        response = model_.handle(request.pdu);
      }
      socket->write_all(MbapFrame::make(request.transaction_id, request.unit_id, std::move(response)).serialize());
    }
  } catch (const Error& e) {
    if (!stopping_) diagnostic_(std::string("connection error: ") + e.what());
  }
  socket->shutdown();
}

}  // namespace hlgym::modbus
