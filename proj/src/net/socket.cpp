#include "hlgym/net/socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "hlgym/errors.hpp"

namespace hlgym::net {

namespace {

std::string errno_text() { return std::strerror(errno); }

// Waits until `fd` is ready for `events`; false on timeout.
bool wait_for(int fd, short events, std::chrono::milliseconds timeout) {
  pollfd p{fd, events, 0};
  while (true) {
    const int rc = ::poll(&p, 1, timeout.count() < 0 ? -1 : static_cast<int>(timeout.count()));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) throw TransportError("poll failed: " + errno_text());
  }
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.release();
  }
  return *this;
}

void Socket::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket Socket::connect(const std::string& host, std::uint16_t port,
                       std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
      rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  Socket sock(::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol));
  if (!sock.valid()) {
    ::freeaddrinfo(res);
    throw TransportError("socket() failed: " + errno_text());
  }
  const int flags = ::fcntl(sock.fd(), F_GETFL, 0);
  ::fcntl(sock.fd(), F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(sock.fd(), res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  const std::string where = host + ":" + std::to_string(port);
  if (rc != 0 && errno != EINPROGRESS) throw TransportError("connect to " + where + ": " + errno_text());
  if (rc != 0) {
    if (!wait_for(sock.fd(), POLLOUT, timeout)) throw TransportError("connect to " + where + " timed out");
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw TransportError("connect to " + where + ": " + std::strerror(err));
  }
  ::fcntl(sock.fd(), F_SETFL, flags);
  const int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return sock;
}

Socket Socket::listen(std::uint16_t port, bool any_interface) {
  Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock.valid()) throw TransportError("socket() failed: " + errno_text());
  const int one = 1;
  ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(any_interface ? INADDR_ANY : INADDR_LOOPBACK);
  if (::bind(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw TransportError("cannot bind port " + std::to_string(port) + ": " + errno_text());
  }
  if (::listen(sock.fd(), 16) != 0) throw TransportError("listen failed: " + errno_text());
  return sock;
}

std::uint16_t Socket::local_port() const {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw TransportError("getsockname failed: " + errno_text());
  }
  return ntohs(addr.sin_port);
}

std::optional<Socket> Socket::accept() const {
  while (true) {
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return Socket(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return std::nullopt;
  }
}

void Socket::write_all(std::span<const std::uint8_t> bytes) const {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("send failed: " + errno_text());
    }
    sent += static_cast<std::size_t>(n);
  }
}

void Socket::write_all(const std::string& text) const {
  write_all(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

bool Socket::read_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) const {
  std::size_t got = 0;
  while (got < out.size()) {
    if (!wait_for(fd_, POLLIN, timeout)) throw TransportError("read timed out");
    const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
    if (n == 0) {
      if (got == 0) return false;
      throw TransportError("connection closed mid-message");
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("recv failed: " + errno_text());
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> LineReader::read_line(std::chrono::milliseconds timeout,
                                                 std::size_t max_line) {
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buffer_.size() > max_line) throw TransportError("line exceeds maximum length");
    if (!wait_for(socket_->fd(), POLLIN, timeout)) throw TransportError("read timed out");
    char chunk[4096];
    const ssize_t n = ::recv(socket_->fd(), chunk, sizeof chunk, 0);
    if (n == 0) return std::nullopt;
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == ECONNRESET) return std::nullopt;
      throw TransportError("recv failed: " + errno_text());
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ArgumentError("expected host:port, got '" + text + "'");
  }
  int port = 0;
  for (char c : text.substr(colon + 1)) {
    if (c < '0' || c > '9') throw ArgumentError("bad port in '" + text + "'");
    port = port * 10 + (c - '0');
    if (port > 65535) throw ArgumentError("port out of range in '" + text + "'");
  }
  return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

}  // namespace hlgym::net
