#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace hlgym::net {

// Owning wrapper around a POSIX TCP socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  bool valid() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }
  int release() noexcept {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close() noexcept;
  // Unblocks pending reads/accepts on other threads.
  void shutdown() noexcept;

  // Throws TransportError on failure or timeout.
  static Socket connect(const std::string& host, std::uint16_t port,
                        std::chrono::milliseconds timeout);
  // Binds 127.0.0.1 (or 0.0.0.0 with any_interface) and listens. Port 0
  // picks an ephemeral port. Throws TransportError when the port is taken.
  static Socket listen(std::uint16_t port, bool any_interface = false);
  std::uint16_t local_port() const;

  // Blocks until a client connects or the socket is shut down (empty result).
  std::optional<Socket> accept() const;

  void write_all(std::span<const std::uint8_t> bytes) const;
  void write_all(const std::string& text) const;
  // Fills `out` completely. Returns false on orderly close before the first
  // byte; throws TransportError on timeout, error or a close mid-read.
  bool read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) const;

 private:
  int fd_ = -1;
};

// Buffered newline-delimited reader on top of a Socket.
class LineReader {
 public:
  explicit LineReader(const Socket& socket) : socket_(&socket) {}

  // Returns the next line without its '\n', or nullopt on orderly close.
  // Throws TransportError on timeout (negative timeout waits forever) or
  // when a line exceeds max_line bytes.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout,
                                       std::size_t max_line = 1 << 20);

 private:
  const Socket* socket_;
  std::string buffer_;
};

// "host:port" -> (host, port). Throws ArgumentError.
std::pair<std::string, std::uint16_t> split_host_port(const std::string& text);

}  // namespace hlgym::net
