#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hlgym/env/arbitrage_env.hpp"
#include "hlgym/net/socket.hpp"

namespace hlgym::env {

// Serves one ArbitrageEnv to external controllers over newline-delimited
// JSON on TCP. One controller at a time; others are refused with "busy".
//
// Requests:  {"id":int,"cmd":"spec"|"reset"|"step"|"close","seed":int?,"action":int?}
// Responses: {"id":..,"observation":[..],"reward":x,"terminated":b,"truncated":b,"info":{..}}
//            or {"id":..,"error":code,"message":text}
class EnvServer {
 public:
  static std::unique_ptr<EnvServer> start(ArbitrageEnvConfig config, Backend& backend,
                                          std::uint16_t port, bool any_interface = false);
  ~EnvServer();
  EnvServer(const EnvServer&) = delete;
  EnvServer& operator=(const EnvServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  void stop();

  // Handles one request object against `env`; exposed for tests and reuse.
  static nlohmann::json handle(ArbitrageEnv& env, const nlohmann::json& request);
  static nlohmann::json step_json(const StepResult& r);

 private:
  EnvServer(ArbitrageEnvConfig config, Backend& backend, std::uint16_t port, bool any_interface);
  void accept_loop();
  void session(std::shared_ptr<net::Socket> socket);

  ArbitrageEnv env_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> busy_{false};
  std::thread accept_thread_;
  std::mutex sessions_mutex_;
  std::vector<std::shared_ptr<net::Socket>> sockets_;
  std::vector<std::thread> sessions_;
};

inline std::unique_ptr<EnvServer> serve_env(ArbitrageEnvConfig config, Backend& backend,
                                            std::uint16_t port) {
  return EnvServer::start(std::move(config), backend, port);
}

}  // namespace hlgym::env
