#include "hlgym/modbus/registers.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "../csv.hpp"
#include "hlgym/errors.hpp"

namespace hlgym::modbus {

std::uint16_t encode_value(const RegisterSpec& spec, double engineering) {
  if (!std::isfinite(engineering)) throw EncodeError(spec.name, "value is not finite");
  const double raw = std::round(engineering / spec.scale);
  const double lo = spec.kind == RegisterKind::u16 ? 0.0 : -32768.0;
  const double hi = spec.kind == RegisterKind::u16 ? 65535.0 : 32767.0;
  if (raw < lo || raw > hi) {
    std::ostringstream msg;
    msg << "value " << engineering << " encodes to " << raw << ", outside [" << lo << ", " << hi
        << "]";
    throw EncodeError(spec.name, msg.str());
  }
  return static_cast<std::uint16_t>(static_cast<std::int32_t>(raw) & 0xFFFF);
}

double decode_value(const RegisterSpec& spec, std::uint16_t raw) {
  if (spec.kind == RegisterKind::i16) return static_cast<std::int16_t>(raw) * spec.scale;
  return raw * spec.scale;
}

RegisterMap::RegisterMap(std::vector<RegisterSpec> registers, std::uint8_t unit_id)
    : registers_(std::move(registers)), unit_id_(unit_id) {
  std::set<std::uint16_t> addresses;
  std::set<std::string> names;
  for (const auto& r : registers_) {
    if (!addresses.insert(r.address).second) {
      throw ConfigError("duplicate register address " + std::to_string(r.address));
    }
    if (r.name.empty() || !names.insert(r.name).second) {
      throw ConfigError("missing or duplicate register name '" + r.name + "'");
    }
    if (!(r.scale > 0.0) || !std::isfinite(r.scale)) {
      throw ConfigError("register '" + r.name + "' needs a positive scale");
    }
  }
}

const RegisterSpec* RegisterMap::find(std::uint16_t address) const {
  for (const auto& r : registers_) {
    if (r.address == address) return &r;
  }
  return nullptr;
}

const RegisterSpec& RegisterMap::at(std::string_view name) const {
  for (const auto& r : registers_) {
    if (r.name == name) return r;
  }
  throw NotFoundError("register map has no register named '" + std::string(name) + "'");
}

bool RegisterMap::contains(std::string_view name) const {
  for (const auto& r : registers_) {
    if (r.name == name) return true;
  }
  return false;
}

RegisterMap RegisterMap::parse(std::string_view text) {
  std::vector<RegisterSpec> regs;
  std::uint8_t unit_id = 1;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "unit_id") {
      if (tok.size() != 2) throw ParseError("expected 'unit_id <n>'", line_no);
      const double v = detail::parse_double(tok[1], line_no);
      if (v < 0 || v > 255 || v != std::floor(v)) throw ParseError("unit_id out of range", line_no);
      unit_id = static_cast<std::uint8_t>(v);
      continue;
    }
    if (tok.size() != 6) {
      throw ParseError("expected '<address> <name> <kind> <scale> <unit> <access>'", line_no);
    }
    RegisterSpec spec;
    const double addr = detail::parse_double(tok[0], line_no);
    if (addr < 0 || addr > 65535 || addr != std::floor(addr)) {
      throw ParseError("address out of range", line_no);
    }
    spec.address = static_cast<std::uint16_t>(addr);
    spec.name = tok[1];
    if (tok[2] == "u16") {
      spec.kind = RegisterKind::u16;
    } else if (tok[2] == "i16") {
      spec.kind = RegisterKind::i16;
    } else {
      throw ParseError("unknown register kind '" + tok[2] + "'", line_no);
    }
    spec.scale = detail::parse_double(tok[3], line_no);
    spec.unit = tok[4];
    if (tok[5] == "read") {
      spec.access = Access::read;
    } else if (tok[5] == "read_write") {
      spec.access = Access::read_write;
    } else {
      throw ParseError("unknown access '" + tok[5] + "'", line_no);
    }
    regs.push_back(std::move(spec));
  }
  try {
    return RegisterMap(std::move(regs), unit_id);
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), 0);
  }
}

RegisterMap RegisterMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open register map " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string RegisterMap::to_text() const {
  std::ostringstream out;
  out << "# address name kind scale unit access\n";
  out << "unit_id " << static_cast<int>(unit_id_) << '\n';
  for (const auto& r : registers_) {
    out << r.address << ' ' << r.name << ' ' << (r.kind == RegisterKind::u16 ? "u16" : "i16")
        << ' ' << detail::format_exact(r.scale) << ' ' << r.unit << ' '
        << (r.access == Access::read ? "read" : "read_write") << '\n';
  }
  return out.str();
}

const RegisterMap& default_register_map() {
  static const RegisterMap map = RegisterMap::parse(R"(
unit_id 1
0  soc                 u16 0.01 %    read
1  battery_power       i16 0.01 kW   read
2  battery_setpoint    i16 0.01 kW   read_write
3  room_temp           i16 0.01 degC read
4  thermostat_setpoint i16 0.01 degC read_write
5  pv_power            i16 0.01 kW   read
6  load_power          u16 0.01 kW   read
7  grid_power          i16 0.01 kW   read
8  heartbeat           u16 1    tick read
9  charge_energy       u16 0.1  Wh   read
10 discharge_energy    u16 0.1  Wh   read
)");
  return map;
}

}  // namespace hlgym::modbus
