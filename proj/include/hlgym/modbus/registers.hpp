#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hlgym::modbus {

enum class RegisterKind { u16, i16 };
enum class Access { read, read_write };

// One 16-bit holding register and its fixed-point conversion
// (engineering value = raw * scale).
struct RegisterSpec {
  std::uint16_t address = 0;
  std::string name;
  RegisterKind kind = RegisterKind::u16;
  double scale = 1.0;
  std::string unit;
  Access access = Access::read;
};

// Rounds half away from zero; throws EncodeError naming the register when
// the result does not fit the register kind.
std::uint16_t encode_value(const RegisterSpec& spec, double engineering);
double decode_value(const RegisterSpec& spec, std::uint16_t raw);

class RegisterMap {
 public:
  explicit RegisterMap(std::vector<RegisterSpec> registers, std::uint8_t unit_id = 1);

  const std::vector<RegisterSpec>& registers() const noexcept { return registers_; }
  std::uint8_t unit_id() const noexcept { return unit_id_; }

  const RegisterSpec* find(std::uint16_t address) const;
  // Throws NotFoundError.
  const RegisterSpec& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  // Declarative text form, one register per line:
  //   <address> <name> <u16|i16> <scale> <unit> <read|read_write>
  // '#' starts a comment. Optional `unit_id <n>` line.
  static RegisterMap parse(std::string_view text);
  static RegisterMap load(const std::filesystem::path& path);
  std::string to_text() const;

 private:
  std::vector<RegisterSpec> registers_;
  std::uint8_t unit_id_;
};

// Names used by the emulator and the MODBUS-backed environment backend.
namespace reg {
inline constexpr std::string_view soc = "soc";
inline constexpr std::string_view battery_power = "battery_power";
inline constexpr std::string_view battery_setpoint = "battery_setpoint";
inline constexpr std::string_view room_temp = "room_temp";
inline constexpr std::string_view thermostat_setpoint = "thermostat_setpoint";
inline constexpr std::string_view pv_power = "pv_power";
inline constexpr std::string_view load_power = "load_power";
inline constexpr std::string_view grid_power = "grid_power";
inline constexpr std::string_view heartbeat = "heartbeat";
inline constexpr std::string_view charge_energy = "charge_energy";
inline constexpr std::string_view discharge_energy = "discharge_energy";
}  // namespace reg

// Default ESS/HVAC map:
//   0 soc                 u16  0.01 %     read
//   1 battery_power       i16  0.01 kW    read
//   2 battery_setpoint    i16  0.01 kW    read_write
//   3 room_temp           i16  0.01 degC  read
//   4 thermostat_setpoint i16  0.01 degC  read_write
//   5 pv_power            i16  0.01 kW    read
//   6 load_power          u16  0.01 kW    read
//   7 grid_power          i16  0.01 kW    read
//   8 heartbeat           u16  1 tick     read  (emulator tick counter, wraps)
//   9 charge_energy       u16  0.1 Wh     read  (AC energy into the battery, wraps)
//  10 discharge_energy    u16  0.1 Wh     read  (AC energy out of the battery, wraps)
const RegisterMap& default_register_map();

}  // namespace hlgym::modbus
