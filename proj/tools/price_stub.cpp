// Serves a price fixture on the day-ahead endpoint protocol until interrupted.

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "hlgym/errors.hpp"
#include "hlgym/prices.hpp"

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop.store(true); }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local day-ahead price endpoint serving GET /dayahead?area=..&date=YYYY-MM-DD"};
  std::string fixture;
  int port = 0;
  hlgym::PriceStubScript script;
  double run_for = 0;
  app.add_option("--fixture", fixture, "hourly price CSV to serve")->required();
  app.add_option("--port", port, "listen port (0: ephemeral)");
  app.add_option("--fail-first", script.fail_first, "answer the first n requests with HTTP 500");
  app.add_option("--drop-last-hours", script.drop_last_hours, "truncate every served day");
  app.add_option("--run-for", run_for, "stop after this many seconds (0: until interrupted)");
  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    hlgym::PriceStubServer server(hlgym::load_fixture(fixture), static_cast<std::uint16_t>(port), script);
    std::cout << server.endpoint() << std::endl;
    const auto t0 = std::chrono::steady_clock::now();
    while (!g_stop.load()) {
      if (run_for > 0 && std::chrono::steady_clock::now() - t0 >= std::chrono::duration<double>(run_for)) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    server.stop();
    std::cout << server.requests() << " requests served" << std::endl;
  } catch (const hlgym::TransportError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
