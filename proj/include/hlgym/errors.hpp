#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hlgym {

// Base of every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class LifecycleError : public Error {
 public:
  using Error::Error;
};

// Network unreachable, timeouts, HTTP failures after retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

class LoggingError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  // 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EncodeError : public Error {
 public:
  EncodeError(const std::string& register_name, const std::string& what)
      : Error("register '" + register_name + "': " + what), register_name_(register_name) {}

  const std::string& register_name() const noexcept { return register_name_; }

 private:
  std::string register_name_;
};

// MODBUS exception responses and framing violations. exception_code() is 0
// for violations that did not come from an exception response.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::uint8_t exception_code = 0)
      : Error(what), exception_code_(exception_code) {}

  std::uint8_t exception_code() const noexcept { return exception_code_; }

 private:
  std::uint8_t exception_code_;
};

}  // namespace hlgym
