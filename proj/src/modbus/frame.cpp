#include "hlgym/modbus/frame.hpp"

#include <string>

#include "hlgym/errors.hpp"

namespace hlgym::modbus {

MbapFrame MbapFrame::make(std::uint16_t transaction_id, std::uint8_t unit_id,
                          std::vector<std::uint8_t> pdu) {
  MbapFrame f;
  f.transaction_id = transaction_id;
  f.unit_id = unit_id;
  f.length = static_cast<std::uint16_t>(pdu.size() + 1);
  f.pdu = std::move(pdu);
  return f;
}

std::vector<std::uint8_t> MbapFrame::serialize() const {
  if (length != pdu.size() + 1) throw ProtocolError("MBAP length does not match PDU size");
  std::vector<std::uint8_t> out;
  out.reserve(mbap_header_size + pdu.size());
  put_u16(out, transaction_id);
  put_u16(out, protocol_id);
  put_u16(out, length);
  out.push_back(unit_id);
  out.insert(out.end(), pdu.begin(), pdu.end());
  return out;
}

std::size_t frame_pdu_size(std::span<const std::uint8_t> header) {
  if (header.size() < mbap_header_size) throw ProtocolError("short MBAP header");
  if (get_u16(header, 2) != 0) throw ProtocolError("MBAP protocol id is not 0");
  const std::uint16_t length = get_u16(header, 4);
  if (length < 2 || length > max_pdu_size + 1) {
    throw ProtocolError("MBAP length " + std::to_string(length) + " out of range");
  }
  return length - 1u;
}

MbapFrame parse_frame(std::span<const std::uint8_t> bytes) {
  const std::size_t pdu_size = frame_pdu_size(bytes);
  if (bytes.size() != mbap_header_size + pdu_size) {
    throw ProtocolError("frame size does not match MBAP length");
  }
  MbapFrame f;
  f.transaction_id = get_u16(bytes, 0);
  f.protocol_id = 0;
  f.length = get_u16(bytes, 4);
  f.unit_id = bytes[6];
  f.pdu.assign(bytes.begin() + mbap_header_size, bytes.end());
  return f;
}

std::vector<std::uint8_t> read_holding_request(std::uint16_t address, std::uint16_t count) {
  std::vector<std::uint8_t> pdu{fc_read_holding};
  put_u16(pdu, address);
  put_u16(pdu, count);
  return pdu;
}

std::vector<std::uint8_t> write_single_request(std::uint16_t address, std::uint16_t raw) {
  std::vector<std::uint8_t> pdu{fc_write_single};
  put_u16(pdu, address);
  put_u16(pdu, raw);
  return pdu;
}

std::vector<std::uint8_t> write_multiple_request(std::uint16_t address,
                                                 std::span<const std::uint16_t> raws) {
  std::vector<std::uint8_t> pdu{fc_write_multiple};
  put_u16(pdu, address);
  put_u16(pdu, static_cast<std::uint16_t>(raws.size()));
  pdu.push_back(static_cast<std::uint8_t>(raws.size() * 2));
  for (auto r : raws) put_u16(pdu, r);
  return pdu;
}

std::vector<std::uint8_t> exception_pdu(std::uint8_t function, std::uint8_t code) {
  return {static_cast<std::uint8_t>(function | 0x80), code};
}

}  // namespace hlgym::modbus
