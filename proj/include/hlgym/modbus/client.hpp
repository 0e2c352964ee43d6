#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hlgym/modbus/frame.hpp"
#include "hlgym/net/socket.hpp"

namespace hlgym::modbus {

// Blocking MODBUS/TCP master. One request in flight at a time; callers
// serialize access to a client.
class Client {
 public:
  static constexpr std::chrono::milliseconds default_timeout{2000};

  // Throws TransportError when the server cannot be reached.
  Client(std::string host, std::uint16_t port, std::uint8_t unit_id = 1,
         std::chrono::milliseconds timeout = default_timeout);

  // Function 0x03. count in [1, 125] or ArgumentError.
  std::vector<std::uint16_t> read_holding(std::uint16_t address, std::uint16_t count);
  // Function 0x06; the echoed response is validated.
  void write_register(std::uint16_t address, std::uint16_t raw);
  // Function 0x10.
  void write_registers(std::uint16_t address, std::span<const std::uint16_t> raws);

  // Sends an arbitrary PDU and returns the response PDU (exception responses
  // are returned as-is, not thrown).
  std::vector<std::uint8_t> transact(std::vector<std::uint8_t> pdu);

  const std::string& host() const noexcept { return host_; }
  std::uint16_t port() const noexcept { return port_; }

 private:
  std::vector<std::uint8_t> checked(std::vector<std::uint8_t> pdu);

  std::string host_;
  std::uint16_t port_;
  std::uint8_t unit_id_;
  std::chrono::milliseconds timeout_;
  net::Socket socket_;
  std::uint16_t next_transaction_ = 1;
};

}  // namespace hlgym::modbus
