#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlgym/battery.hpp"
#include "hlgym/control/qlearning.hpp"
#include "hlgym/env/arbitrage_env.hpp"
#include "hlgym/modbus/emulator.hpp"
#include "hlgym/thermal.hpp"
#include "hlgym/time_grid.hpp"

namespace hlgym::cli {

enum class ValueKind { number, integer, boolean, text, date, list };

struct OptionSpec {
  std::string section;
  std::string key;
  ValueKind kind;
  std::string default_value;
  std::string help;
};

// Every recognized `section.key`, in file order.
const std::vector<OptionSpec>& option_specs();

// Effective configuration: defaults, then the INI file, then overrides.
// Values are kept in canonical text form so that equal settings hash equally.
class Config {
 public:
  Config();

  // Throws ConfigError for unknown sections or keys and malformed values,
  // NotFoundError when the file is missing.
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& ini_text);

  // `section.key=value`; throws ConfigError.
  void set(const std::string& dotted, const std::string& value);
  void set_override(const std::string& assignment);

  const std::string& text(const std::string& dotted) const;
  double number(const std::string& dotted) const;
  long long integer(const std::string& dotted) const;
  bool boolean(const std::string& dotted) const;
  Timestamp date(const std::string& dotted) const;
  std::vector<double> list(const std::string& dotted) const;

  std::string to_ini() const;
  nlohmann::json to_json() const;
  std::string hash() const;

  BatteryParams battery(bool ideal) const;
  ThermalParams thermal() const;
  ThermalState initial_thermal() const;
  control::QHyper hyper() const;
  // Environment template on a one-day grid starting at `day`, without prices.
  env::ArbitrageEnvConfig env_template(Timestamp day, bool ideal) const;
  modbus::EmulatorConfig emulator() const;

 private:
  std::map<std::string, std::string> values_;
};

// Defaults rendered as INI, the default register map and battery parameters.
std::string defaults_help();

}  // namespace hlgym::cli
