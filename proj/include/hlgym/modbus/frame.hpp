#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hlgym::modbus {

inline constexpr std::uint8_t fc_read_holding = 0x03;
inline constexpr std::uint8_t fc_write_single = 0x06;
inline constexpr std::uint8_t fc_write_multiple = 0x10;

inline constexpr std::uint8_t ex_illegal_function = 0x01;
inline constexpr std::uint8_t ex_illegal_address = 0x02;
inline constexpr std::uint8_t ex_illegal_value = 0x03;

inline constexpr std::size_t mbap_header_size = 7;
inline constexpr std::size_t max_pdu_size = 253;
inline constexpr std::uint16_t max_read_count = 125;
inline constexpr std::uint16_t max_write_count = 123;

// MODBUS/TCP application data unit: MBAP header plus PDU.
struct MbapFrame {
  std::uint16_t transaction_id = 0;
  std::uint16_t protocol_id = 0;
  std::uint16_t length = 0;  // byte count of unit_id + pdu
  std::uint8_t unit_id = 1;
  std::vector<std::uint8_t> pdu;

  static MbapFrame make(std::uint16_t transaction_id, std::uint8_t unit_id,
                        std::vector<std::uint8_t> pdu);

  std::vector<std::uint8_t> serialize() const;

  friend bool operator==(const MbapFrame&, const MbapFrame&) = default;
};

// Reads the length field of a 7-byte header and returns the number of PDU
// bytes that follow it. Throws ProtocolError for an invalid header.
std::size_t frame_pdu_size(std::span<const std::uint8_t> header);

// Parses exactly one complete frame. Throws ProtocolError on malformed input.
MbapFrame parse_frame(std::span<const std::uint8_t> bytes);

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

inline std::uint16_t get_u16(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return static_cast<std::uint16_t>((bytes[offset] << 8) | bytes[offset + 1]);
}

std::vector<std::uint8_t> read_holding_request(std::uint16_t address, std::uint16_t count);
std::vector<std::uint8_t> write_single_request(std::uint16_t address, std::uint16_t raw);
std::vector<std::uint8_t> write_multiple_request(std::uint16_t address,
                                                 std::span<const std::uint16_t> raws);
std::vector<std::uint8_t> exception_pdu(std::uint8_t function, std::uint8_t code);

}  // namespace hlgym::modbus
