#include "hlgym/modbus/client.hpp"

#include <array>

#include "hlgym/errors.hpp"

namespace hlgym::modbus {

Client::Client(std::string host, std::uint16_t port, std::uint8_t unit_id,
               std::chrono::milliseconds timeout)
    : host_(std::move(host)),
      port_(port),
      unit_id_(unit_id),
      timeout_(timeout),
      socket_(net::Socket::connect(host_, port_, timeout_)) {}

std::vector<std::uint8_t> Client::transact(std::vector<std::uint8_t> pdu) {
  const std::uint16_t tid = next_transaction_++;
  const std::uint8_t function = pdu.empty() ? 0 : pdu[0];
  socket_.write_all(MbapFrame::make(tid, unit_id_, std::move(pdu)).serialize());

  std::array<std::uint8_t, mbap_header_size> header{};
  if (!socket_.read_exact(header, timeout_)) throw TransportError("server closed the connection");
  const std::size_t pdu_size = frame_pdu_size(header);
  std::vector<std::uint8_t> frame(header.begin(), header.end());
  frame.resize(mbap_header_size + pdu_size);
  if (!socket_.read_exact(std::span(frame).subspan(mbap_header_size), timeout_)) {
    throw TransportError("server closed the connection");
  }
  MbapFrame response = parse_frame(frame);
  if (response.transaction_id != tid) {
    throw ProtocolError("transaction id mismatch: sent " + std::to_string(tid) + ", got " +
                        std::to_string(response.transaction_id));
  }
  if (response.pdu.empty() || (response.pdu[0] & 0x7F) != function) {
    throw ProtocolError("response function code does not match request");
  }
  return std::move(response.pdu);
}

std::vector<std::uint8_t> Client::checked(std::vector<std::uint8_t> pdu) {
  auto response = transact(std::move(pdu));
  if (response[0] & 0x80) {
    const std::uint8_t code = response.size() >= 2 ? response[1] : 0;
    throw ProtocolError("MODBUS exception 0x" + std::to_string(code) + " for function " +
                            std::to_string(response[0] & 0x7F),
                        code);
  }
  return response;
}

std::vector<std::uint16_t> Client::read_holding(std::uint16_t address, std::uint16_t count) {
  if (count < 1 || count > max_read_count) {
    throw ArgumentError("read count " + std::to_string(count) + " outside [1, 125]");
  }
  const auto pdu = checked(read_holding_request(address, count));
  if (pdu.size() != 2u + 2u * count || pdu[1] != 2 * count) {
    throw ProtocolError("read response byte count mismatch");
  }
  std::vector<std::uint16_t> raws(count);
  for (std::size_t i = 0; i < count; ++i) raws[i] = get_u16(pdu, 2 + 2 * i);
  return raws;
}

void Client::write_register(std::uint16_t address, std::uint16_t raw) {
  auto request = write_single_request(address, raw);
  const auto echo = checked(request);
  if (echo != request) throw ProtocolError("write response does not echo the request");
}

void Client::write_registers(std::uint16_t address, std::span<const std::uint16_t> raws) {
  if (raws.empty() || raws.size() > max_write_count) {
    throw ArgumentError("write count outside [1, 123]");
  }
  const auto pdu = checked(write_multiple_request(address, raws));
  if (pdu.size() != 5 || get_u16(pdu, 1) != address || get_u16(pdu, 3) != raws.size()) {
    throw ProtocolError("write-multiple response mismatch");
  }
}

}  // namespace hlgym::modbus
