#include "hlgym/env/env_server.hpp"

#include "hlgym/errors.hpp"

namespace hlgym::env {

namespace {

using nlohmann::json;

json error_json(const json& id, const std::string& code, const std::string& message) {
  return {{"id", id}, {"error", code}, {"message", message}};
}

}  // namespace

json EnvServer::step_json(const StepResult& r) {
  return {{"observation", r.observation},
          {"reward", r.reward},
          {"terminated", r.terminated},
          {"truncated", r.truncated},
          {"info",
           {{"delivered_kw", r.info.delivered_kw},
            {"setpoint_kw", r.info.setpoint_kw},
            {"price_eur_mwh", r.info.price_eur_mwh},
            {"next_price_eur_mwh", r.info.next_price_eur_mwh},
            {"soc", r.info.soc},
            {"temp_c", r.info.temp_c},
            {"step", r.info.step}}}};
}

json EnvServer::handle(ArbitrageEnv& env, const json& request) {
  const json id = request.is_object() && request.contains("id") ? request["id"] : json(nullptr);
  if (!request.is_object() || !request.contains("id") || !request["id"].is_number_integer() ||
      !request.contains("cmd") || !request["cmd"].is_string()) {
    return error_json(id, "bad_request", "request needs integer 'id' and string 'cmd'");
  }
  const std::string cmd = request["cmd"];
  try {
    if (cmd == "spec") {
      const auto& c = env.config();
      return {{"id", id},
              {"observation_size", observation_size},
              {"action_count", env.action_count()},
              {"action_set_kw", c.action_set_kw},
              {"n_steps", c.grid.n_steps()},
              {"step_seconds", c.grid.step_seconds()},
              {"start", format_iso8601(c.grid.start())}};
    }
    if (cmd == "reset") {
      std::uint64_t seed = 0;
      if (request.contains("seed")) {
        if (!request["seed"].is_number_unsigned()) {
          return error_json(id, "bad_request", "'seed' must be a non-negative integer");
        }
        seed = request["seed"].get<std::uint64_t>();
      }
      json out = step_json(env.reset(Seed{seed}));
      out["id"] = id;
      return out;
    }
    if (cmd == "step") {
      if (!request.contains("action") || !request["action"].is_number_integer()) {
        return error_json(id, "bad_request", "'step' needs an integer 'action'");
      }
      const auto action = request["action"].get<std::int64_t>();
      if (action < 0 || static_cast<std::size_t>(action) >= env.action_count()) {
        return error_json(id, "bad_request", "action out of range");
      }
      json out = step_json(env.step(static_cast<std::size_t>(action)));
      out["id"] = id;
      return out;
    }
    if (cmd == "close") return {{"id", id}, {"closed", true}};
    return error_json(id, "bad_request", "unknown cmd '" + cmd + "'");
  } catch (const LifecycleError& e) {
    return error_json(id, "lifecycle", e.what());
  } catch (const TransportError& e) {
    json out = error_json(id, "transport", e.what());
    out["truncated"] = true;
    return out;
  } catch (const Error& e) {
    return error_json(id, "internal", e.what());
  }
}

EnvServer::EnvServer(ArbitrageEnvConfig config, Backend& backend, std::uint16_t port, bool any_interface)
    : env_(std::move(config), backend), listener_(net::Socket::listen(port, any_interface)) {
  port_ = listener_.local_port();
}

std::unique_ptr<EnvServer> EnvServer::start(ArbitrageEnvConfig config, Backend& backend,
                                            std::uint16_t port, bool any_interface) {
  std::unique_ptr<EnvServer> server(new EnvServer(std::move(config), backend, port, any_interface));
  server->accept_thread_ = std::thread([s = server.get()] { s->accept_loop(); });
  return server;
}

EnvServer::~EnvServer() { stop(); }

void EnvServer::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(sessions_mutex_);
    for (auto& s : sockets_) s->shutdown();
    threads.swap(sessions_);
  }
  for (auto& t : threads) t.join();
  listener_.close();
}

void EnvServer::accept_loop() {
  while (!stopping_) {
    auto client = listener_.accept();
    if (!client) break;
    auto socket = std::make_shared<net::Socket>(std::move(*client));
    if (busy_.exchange(true)) {
      try {
        socket->write_all(error_json(nullptr, "busy", "another controller holds the environment").dump() + "\n");
      } catch (const Error&) {
      }
      socket->shutdown();
      continue;
    }
    std::lock_guard lock(sessions_mutex_);
    if (stopping_) {
      busy_ = false;
      break;
    }
    sockets_.push_back(socket);
    sessions_.emplace_back([this, socket] { session(socket); });
  }
}

void EnvServer::session(std::shared_ptr<net::Socket> socket) {
  net::LineReader reader(*socket);
  try {
    while (!stopping_) {
      const auto line = reader.read_line(std::chrono::milliseconds(-1));
      if (!line) break;
      if (line->empty()) continue;
      json response;
      bool close_after = false;
      try {
        const json request = json::parse(*line);
        response = handle(env_, request);
        close_after = response.contains("closed");
      } catch (const json::exception& e) {
        response = error_json(nullptr, "bad_request", std::string("malformed JSON: ") + e.what());
      }
      socket->write_all(response.dump() + "\n");
      if (close_after) break;
    }
  } catch (const Error&) {
  }
  socket->shutdown();
  {
    std::lock_guard lock(sessions_mutex_);
    std::erase(sockets_, socket);
  }
  busy_ = false;
}

}  // namespace hlgym::env
