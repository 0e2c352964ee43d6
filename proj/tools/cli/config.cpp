#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "csv.hpp"
#include "hlgym/errors.hpp"
#include "hlgym/modbus/registers.hpp"
#include "hlgym/telemetry.hpp"

namespace hlgym::cli {

namespace {

using K = ValueKind;

std::string dotted(const OptionSpec& o) { return o.section + "." + o.key; }

const OptionSpec& spec_of(const std::string& name) {
  for (const auto& o : option_specs()) {
    if (dotted(o) == name) return o;
  }
  throw ConfigError("unknown config key '" + name + "'");
}

std::string bad(const std::string& name, const std::string& value, const char* expected) {
  return "config key '" + name + "': '" + value + "' is not " + expected;
}

double to_number(const std::string& name, const std::string& value) {
  try {
    return detail::parse_double(value, 0);
  } catch (const ParseError&) {
    throw ConfigError(bad(name, value, "a finite number"));
  }
}

// Canonical text for a value of the given kind.
std::string canonical(const OptionSpec& o, const std::string& raw) {
  const std::string name = dotted(o);
  const std::string v(detail::trim(raw));
  switch (o.kind) {
    case K::number: {
      const double x = to_number(name, v);
      if (!std::isfinite(x)) throw ConfigError(bad(name, v, "a finite number"));
      return detail::format_exact(x);
    }
    case K::integer: {
      std::size_t used = 0;
      long long x = 0;
      try {
        x = std::stoll(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (v.empty() || used != v.size()) throw ConfigError(bad(name, v, "an integer"));
      return std::to_string(x);
    }
    case K::boolean:
      if (v == "true" || v == "1" || v == "yes" || v == "on") return "true";
      if (v == "false" || v == "0" || v == "no" || v == "off") return "false";
      throw ConfigError(bad(name, v, "a boolean"));
    case K::date:
      try {
        return format_date(parse_date(v));
      } catch (const Error&) {
        throw ConfigError(bad(name, v, "a YYYY-MM-DD date"));
      }
    case K::list: {
      std::string out;
      for (auto field : detail::split(v, ',')) {
        const double x = to_number(name, std::string(field));
        if (!out.empty()) out += ",";
        out += detail::format_exact(x);
      }
      return out;
    }
    case K::text:
      return v;
  }
  return v;
}

}  // namespace

const std::vector<OptionSpec>& option_specs() {
  static const std::vector<OptionSpec> specs = {
      {"data", "prices", K::text, "data/belpex_2023_synthetic.csv", "hourly price fixture (timestamp,price_eur_mwh)"},
      {"data", "runs", K::text, "runs", "run store root"},
      {"env", "step_s", K::integer, "900", "control step in seconds"},
      {"env", "actions_kw", K::list, "-1,0,1", "battery setpoints, one per action index"},
      {"env", "initial_soc", K::number, "0.5", "state of charge at reset"},
      {"battery", "capacity_kwh", K::number, "10", "usable capacity"},
      {"battery", "p_max_kw", K::number, "2.5", "charge/discharge power limit"},
      {"battery", "eta_charge", K::number, "0.95", "charging efficiency"},
      {"battery", "eta_discharge", K::number, "0.95", "discharging efficiency"},
      {"battery", "taper_start_soc", K::number, "0.8", "charge acceptance tapers linearly above this SoC"},
      {"battery", "soc_min", K::number, "0.05", "discharge cutoff"},
      {"battery", "soc_max", K::number, "1", "charge ceiling"},
      {"battery", "taper", K::boolean, "true", "apply the charge taper on the non-ideal plant"},
      {"battery", "tracking_noise_std_kw", K::number, "0.05", "setpoint tracking noise on the non-ideal plant"},
      {"thermal", "tau_h", K::number, "20", "room time constant"},
      {"thermal", "heat_rate_k_per_h", K::number, "2", "heating rate with the heat pump on"},
      {"thermal", "t_ambient_c", K::number, "8", "outdoor temperature"},
      {"thermal", "hysteresis_c", K::number, "0.5", "thermostat half band"},
      {"thermal", "setpoint_c", K::number, "20", "thermostat setpoint"},
      {"thermal", "initial_temp_c", K::number, "18", "room temperature at start"},
      {"train", "episodes", K::integer, "2000", "training episodes"},
      {"train", "seed", K::integer, "1", "training seed"},
      {"train", "from", K::date, "2023-01-01", "first training day"},
      {"train", "to", K::date, "2023-12-28", "first day after the training range"},
      {"train", "alpha", K::number, "0.1", "learning rate"},
      {"train", "gamma", K::number, "0.99", "discount"},
      {"train", "epsilon_start", K::number, "1", "initial exploration rate"},
      {"train", "epsilon_end", K::number, "0.05", "final exploration rate"},
      {"train", "decay_fraction", K::number, "0.8", "share of episodes over which epsilon decays"},
      {"train", "random_initial_soc", K::boolean, "true", "draw each episode's starting SoC uniformly"},
      {"transfer", "from", K::date, "2023-12-28", "first evaluation day"},
      {"transfer", "days", K::integer, "4", "evaluation days"},
      {"transfer", "seed", K::integer, "7", "evaluation seed"},
      {"emulator", "host", K::text, "127.0.0.1", "emulator host for transfer"},
      {"emulator", "port", K::integer, "15020", "MODBUS/TCP port"},
      {"emulator", "time_scale", K::number, "3600", "emulated seconds per wall second"},
      {"emulator", "tick_s", K::number, "10", "emulated seconds per model tick"},
      {"emulator", "seed", K::integer, "0", "plant noise seed"},
      {"emulator", "ideal", K::boolean, "false", "serve the ideal battery (no taper, no noise)"},
      {"emulator", "initial_soc", K::number, "0.5", "SoC at emulator start"},
      {"emulator", "start", K::date, "2023-01-01", "emulated date at start"},
      {"emulator", "register_map", K::text, "", "register map file; empty for the default map"},
      {"emulator", "any_interface", K::boolean, "false", "listen on all interfaces instead of loopback"},
      {"prices", "endpoint", K::text, "", "day-ahead endpoint URL"},
      {"prices", "area", K::text, "BE", "bidding zone"},
      {"prices", "retries", K::integer, "2", "retries after a failed request"},
      {"prices", "timeout_ms", K::integer, "5000", "per-request timeout"},
      {"env_server", "port", K::integer, "5555", "port for serve-env"},
  };
  return specs;
}

Config::Config() {
  for (const auto& o : option_specs()) values_[dotted(o)] = canonical(o, o.default_value);
}

Config Config::parse(const std::string& ini_text) {
  boost::property_tree::ptree tree;
  std::istringstream in(ini_text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  Config c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config key '" + section + "' outside a section");
    for (const auto& [key, value] : body) c.set(section + "." + key, value.data());
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("config file " + path.string() + " not found");
  std::stringstream s;
  s << in.rdbuf();
  return parse(s.str());
}

void Config::set(const std::string& name, const std::string& value) {
  values_[name] = canonical(spec_of(name), value);
}

void Config::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not section.key=value");
  set(std::string(detail::trim(assignment.substr(0, eq))), assignment.substr(eq + 1));
}

const std::string& Config::text(const std::string& name) const {
  spec_of(name);
  return values_.at(name);
}

double Config::number(const std::string& name) const { return to_number(name, text(name)); }

long long Config::integer(const std::string& name) const { return std::stoll(text(name)); }

bool Config::boolean(const std::string& name) const { return text(name) == "true"; }

Timestamp Config::date(const std::string& name) const { return parse_date(text(name)); }

std::vector<double> Config::list(const std::string& name) const {
  std::vector<double> out;
  for (auto field : detail::split(text(name), ',')) out.push_back(to_number(name, std::string(field)));
  return out;
}

std::string Config::to_ini() const {
  std::string out, section;
  for (const auto& o : option_specs()) {
    if (o.section != section) {
      if (!section.empty()) out += "\n";
      section = o.section;
      out += "[" + section + "]\n";
    }
    const auto& v = values_.at(dotted(o));
    out += o.key + (v.empty() ? " =" : " = " + v) + "\n";
  }
  return out;
}

nlohmann::json Config::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& o : option_specs()) j[o.section][o.key] = values_.at(dotted(o));
  return j;
}

std::string Config::hash() const { return telemetry::config_hash(to_json()); }

BatteryParams Config::battery(bool ideal) const {
  BatteryParams p;
  p.capacity_kwh = number("battery.capacity_kwh");
  p.p_max_kw = number("battery.p_max_kw");
  p.eta_charge = number("battery.eta_charge");
  p.eta_discharge = number("battery.eta_discharge");
  p.taper_start_soc = number("battery.taper_start_soc");
  p.soc_min = number("battery.soc_min");
  p.soc_max = number("battery.soc_max");
  p.taper = boolean("battery.taper");
  p.tracking_noise_std_kw = number("battery.tracking_noise_std_kw");
  p.ideal = ideal;
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("[battery] ") + e.what());
  }
  return p;
}

ThermalParams Config::thermal() const {
  ThermalParams p;
  p.tau_h = number("thermal.tau_h");
  p.heat_rate_k_per_h = number("thermal.heat_rate_k_per_h");
  p.t_ambient_c = number("thermal.t_ambient_c");
  p.hysteresis_c = number("thermal.hysteresis_c");
  p.setpoint_c = number("thermal.setpoint_c");
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("[thermal] ") + e.what());
  }
  return p;
}

ThermalState Config::initial_thermal() const {
  ThermalState s;
  s.temp_c = number("thermal.initial_temp_c");
  s.heater_on = s.temp_c < number("thermal.setpoint_c");
  return s;
}

control::QHyper Config::hyper() const {
  control::QHyper h;
  h.alpha = number("train.alpha");
  h.gamma = number("train.gamma");
  h.epsilon_start = number("train.epsilon_start");
  h.epsilon_end = number("train.epsilon_end");
  h.decay_fraction = number("train.decay_fraction");
  return h;
}

env::ArbitrageEnvConfig Config::env_template(Timestamp day, bool ideal) const {
  const auto step = integer("env.step_s");
  if (step <= 0 || 86400 % step != 0) throw ConfigError("env.step_s must divide one day");
  env::ArbitrageEnvConfig c;
  c.grid = TimeGrid(day, step, 86400 / step);
  c.battery = battery(ideal);
  c.action_set_kw = list("env.actions_kw");
  c.initial_soc = number("env.initial_soc");
  return c;
}

modbus::EmulatorConfig Config::emulator() const {
  modbus::EmulatorConfig c;
  if (!text("emulator.register_map").empty()) c.map = modbus::RegisterMap::load(text("emulator.register_map"));
  c.battery = battery(boolean("emulator.ideal"));
  c.thermal = thermal();
  c.initial_thermal = initial_thermal();
  c.start = date("emulator.start");
  c.initial_soc = number("emulator.initial_soc");
  c.tick_s = number("emulator.tick_s");
  c.time_scale = number("emulator.time_scale");
  c.seed = Seed{static_cast<std::uint64_t>(integer("emulator.seed"))};
  const auto port = integer("emulator.port");
  if (port < 0 || port > 65535) throw ConfigError("emulator.port out of range");
  c.port = static_cast<std::uint16_t>(port);
  c.any_interface = boolean("emulator.any_interface");
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("[emulator] ") + e.what());
  }
  return c;
}

std::string defaults_help() {
  std::string out = "Default configuration (override with --config FILE or --set section.key=value):\n\n";
  std::string section;
  for (const auto& o : option_specs()) {
    if (o.section != section) {
      section = o.section;
      out += "[" + section + "]\n";
    }
    std::string line = "  " + o.key + " = " + o.default_value;
    if (line.size() < 40) line.resize(40, ' ');
    out += line + "  ; " + o.help + "\n";
  }
  out += "\nDefault register map (address name kind scale unit access):\n";
  std::istringstream map(modbus::default_register_map().to_text());
  for (std::string line; std::getline(map, line);) out += "  " + line + "\n";
  const BatteryParams b;
  out += "\nBattery parameters: " + detail::format_exact(b.capacity_kwh) + " kWh, " +
         detail::format_exact(b.p_max_kw) + " kW, eta " + detail::format_exact(b.eta_charge) + "/" +
         detail::format_exact(b.eta_discharge) + ", SoC [" + detail::format_exact(b.soc_min) + ", " +
         detail::format_exact(b.soc_max) + "], taper above " + detail::format_exact(b.taper_start_soc) +
         ", tracking noise " + detail::format_exact(b.tracking_noise_std_kw) + " kW std\n";
  out += "\nExit codes: 0 success, 2 user/config error, 3 environment/IO error, 4 partial result.\n";
  return out;
}

}  // namespace hlgym::cli
