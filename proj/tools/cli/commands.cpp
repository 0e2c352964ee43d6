#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "config.hpp"
#include "hlgym/control/policy.hpp"
#include "hlgym/control/qlearning.hpp"
#include "hlgym/control/transfer.hpp"
#include "hlgym/env/backend.hpp"
#include "hlgym/env/env_server.hpp"
#include "hlgym/errors.hpp"
#include "hlgym/modbus/emulator.hpp"
#include "hlgym/net/socket.hpp"
#include "hlgym/prices.hpp"
#include "hlgym/telemetry.hpp"

namespace hlgym::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

// Installs SIGINT/SIGTERM handlers for the lifetime of a service command.
class SignalScope {
 public:
  SignalScope() {
    g_stop.store(false);
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, &old_int_);
    sigaction(SIGTERM, &sa, &old_term_);
  }
  ~SignalScope() {
    sigaction(SIGINT, &old_int_, nullptr);
    sigaction(SIGTERM, &old_term_, nullptr);
  }

 private:
  struct sigaction old_int_ {};
  struct sigaction old_term_ {};
};

void wait_for_stop(double run_for_s) {
  const auto t0 = std::chrono::steady_clock::now();
  while (!g_stop.load()) {
    if (run_for_s > 0 && std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= run_for_s) {
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

Seed seed_of(long long v) { return Seed{static_cast<std::uint64_t>(v)}; }

PriceSeries load_prices(const Config& config) {
  const std::filesystem::path path = config.text("data.prices");
  if (!std::filesystem::exists(path)) throw ConfigError("price fixture not found: " + path.string());
  return load_fixture(path);
}

std::vector<control::TrainingDay> days_between(const PriceSeries& series, Timestamp from, Timestamp to,
                                               const Config& config) {
  return control::split_days(series.slice(from, to), config.integer("env.step_s"));
}

void print_config(const Config& config, std::ostream& out) {
  out << "# effective config, hash " << config.hash() << "\n" << config.to_ini() << "\n";
}

int cmd_train(Config& config, std::optional<std::string> out_path, std::ostream& out) {
  print_config(config, out);
  const auto series = load_prices(config);
  const auto from = config.date("train.from");
  const auto to = config.date("train.to");
  const auto days = days_between(series, from, to, config);
  if (days.empty()) {
    throw ConfigError("no whole training days in " + format_date(from) + " .. " + format_date(to) + " of " +
                      config.text("data.prices"));
  }
  const auto base = config.env_template(days.front().grid.start(), true);
  env::SimBackend backend(base.battery, config.thermal(), config.initial_thermal());

  telemetry::RunStore store(config.text("data.runs"));
  auto run = store.create_run(config.to_json(), seed_of(config.integer("train.seed")), backend.kind());
  control::TrainOptions options;
  options.episodes = static_cast<int>(config.integer("train.episodes"));
  options.hyper = config.hyper();
  options.random_initial_soc = config.boolean("train.random_initial_soc");
  if (options.episodes < 0) throw ConfigError("train.episodes must be >= 0");

  const auto result = control::train(backend, base, days, options, seed_of(config.integer("train.seed")),
                                     [&](const control::EpisodeSummary& s) {
                                       run.log_event({{"episode", s.episode},
                                                      {"reward_eur", s.reward},
                                                      {"epsilon", s.epsilon}});
                                     });
  const control::QPolicy policy(result.table, result.bins, base.action_set_kw, config.hash());
  const std::filesystem::path target = out_path.value_or((run.dir() / "policy.txt").string());
  policy.save(target);
  if (target != run.dir() / "policy.txt") policy.save(run.dir() / "policy.txt");
  run.finalize();
  out << "trained " << options.episodes << " episodes on " << days.size() << " days ("
      << format_date(days.front().grid.start()) << " .. " << format_date(days.back().grid.start()) << ")\n"
      << "policy: " << target.string() << "\n"
      << "run: " << run.dir().string() << "\n";
  return exit_ok;
}

int cmd_serve_hw(Config& config, double run_for_s, std::ostream& out) {
  print_config(config, out);
  const auto emu = config.emulator();
  SignalScope signals;
  telemetry::RunStore store(config.text("data.runs"));
  const auto log_every = std::max<std::int64_t>(1, static_cast<std::int64_t>(900 / emu.tick_s));
  std::optional<telemetry::Run> run;
  auto observer = [&](const modbus::PlantSnapshot& s) {
    if (!run || s.ticks % log_every != 0) return;
    run->log_event({{"ticks", s.ticks},
                    {"timestamp", format_iso8601(s.now)},
                    {"soc", s.soc},
                    {"setpoint_kw", s.setpoint_kw},
                    {"delivered_kw", s.delivered_kw},
                    {"temp_c", s.temp_c},
                    {"heater_on", s.heater_on},
                    {"pv_kw", s.pv_kw},
                    {"load_kw", s.load_kw},
                    {"grid_kw", s.grid_kw}});
  };
  run.emplace(store.create_run(config.to_json(), emu.seed, emu.battery.ideal ? "emulator-ideal" : "emulator"));
  std::unique_ptr<modbus::EmulatorServer> server;
  try {
    server = modbus::EmulatorServer::start(emu, observer, [&](const std::string& msg) { std::cerr << msg << "\n"; });
  } catch (...) {
    run->finalize("failed");
    throw;
  }
  out << "register map:\n" << emu.map.to_text() << "MODBUS/TCP emulator listening on "
      << (emu.any_interface ? "0.0.0.0" : "127.0.0.1") << ":" << server->port() << " (time scale "
      << emu.time_scale << ", " << (emu.battery.ideal ? "ideal" : "non-ideal") << " battery)\n"
      << "run: " << run->dir().string() << "\n";
  out.flush();
  wait_for_stop(run_for_s);
  server->stop();
  const auto s = server->snapshot();
  run->finalize("stopped");
  out << "stopped after " << s.ticks << " ticks at " << format_iso8601(s.now) << ", soc " << s.soc << "\n";
  return exit_ok;
}

int cmd_transfer(Config& config, const std::string& policy_path, std::optional<std::string> hw,
                 std::optional<std::string> out_dir, std::ostream& out, std::ostream& err) {
  print_config(config, out);
  const auto policy = control::QPolicy::load(policy_path);
  if (policy.config_hash() != config.hash()) {
    err << "note: policy was trained under config hash " << policy.config_hash() << ", current config is "
        << config.hash() << "\n";
  }
  std::string host = config.text("emulator.host");
  auto port = static_cast<std::uint16_t>(config.integer("emulator.port"));
  if (hw) std::tie(host, port) = net::split_host_port(*hw);

  const auto n_days = static_cast<int>(config.integer("transfer.days"));
  if (n_days <= 0) throw ConfigError("transfer.days must be > 0");
  const auto from = config.date("transfer.from");
  const auto series = load_prices(config);
  const auto days = days_between(series, from, from + std::chrono::days(n_days), config);
  if (static_cast<int>(days.size()) < n_days) {
    throw ConfigError("price fixture " + config.text("data.prices") + " covers only " +
                      std::to_string(days.size()) + " of " + std::to_string(n_days) + " evaluation days from " +
                      format_date(from));
  }
  auto base = config.env_template(from, true);
  base.action_set_kw = policy.action_set_kw();
  env::SimBackend sim(base.battery, config.thermal(), config.initial_thermal());
  env::ModbusBackendOptions mo;
  mo.host = host;
  mo.port = port;
  if (!config.text("emulator.register_map").empty()) {
    mo.map = modbus::RegisterMap::load(config.text("emulator.register_map"));
  }
  mo.tick_s = config.number("emulator.tick_s");
  mo.time_scale = config.number("emulator.time_scale");
  env::ModbusBackend hardware(mo);

  telemetry::RunStore store(config.text("data.runs"));
  auto run = store.create_run(config.to_json(), seed_of(config.integer("transfer.seed")),
                              "modbus:" + host + ":" + std::to_string(port));
  control::TransferReport report;
  try {
    report = control::run_transfer(policy, base, days, sim, hardware,
                                   {n_days, seed_of(config.integer("transfer.seed"))});
  } catch (...) {
    run.finalize("failed");
    throw;
  }
  std::int64_t offset = 0;
  for (const auto& rec : report.real_records) {
    run.log_episode(rec, offset);
    offset += static_cast<std::int64_t>(rec.rows().size());
  }
  const std::filesystem::path dir = out_dir.value_or(run.dir().string());
  std::filesystem::create_directories(dir);
  control::save_transfer(report, dir);
  run.finalize(report.truncated ? "partial" : "finished");
  out << report.summary() << "report: " << dir.string() << "\n";
  if (report.truncated) {
    err << "hardware run truncated: " << report.error << "\n";
    return exit_partial;
  }
  return exit_ok;
}

int cmd_fetch_prices(Config& config, std::optional<std::string> endpoint, std::optional<std::string> fixture,
                     std::optional<std::string> date, const std::string& out_path, std::ostream& out) {
  print_config(config, out);
  std::optional<PriceSeries> series;
  if (fixture) {
    if (!std::filesystem::exists(*fixture)) throw ConfigError("price fixture not found: " + *fixture);
    series = load_fixture(*fixture);
    if (date) {
      const auto day = parse_date(*date);
      series = series->slice(day, day + std::chrono::days(1));
      if (series->size() != 24) {
        throw ValidationError("fixture " + *fixture + " has " + std::to_string(series->size()) +
                              " of 24 hours on " + *date);
      }
    }
  } else {
    const std::string url = endpoint ? *endpoint : config.text("prices.endpoint");
    if (url.empty()) throw ConfigError("fetch-prices needs --endpoint, prices.endpoint or --fixture");
    if (!date) throw ConfigError("fetch-prices from an endpoint needs --date");
    FetchOptions fo;
    fo.retries = static_cast<int>(config.integer("prices.retries"));
    fo.timeout = std::chrono::milliseconds(config.integer("prices.timeout_ms"));
    series = fetch_day_ahead(url, config.text("prices.area"), parse_date(*date), fo);
  }
  try {
    save_fixture(*series, out_path);
  } catch (const NotFoundError& e) {
    throw LoggingError(e.what());
  }
  out << "wrote " << series->size() << " hourly prices to " << out_path << "\n";
  return exit_ok;
}

int cmd_serve_env(Config& config, std::optional<std::string> hw, bool ideal, std::optional<std::string> date,
                  double run_for_s, std::ostream& out) {
  print_config(config, out);
  const auto day = date ? parse_date(*date) : config.date("transfer.from");
  const auto series = load_prices(config);
  auto c = config.env_template(day, ideal);
  c.prices = resample(series, c.grid);
  std::unique_ptr<env::Backend> backend;
  if (hw) {
    env::ModbusBackendOptions mo;
    std::tie(mo.host, mo.port) = net::split_host_port(*hw);
    mo.tick_s = config.number("emulator.tick_s");
    mo.time_scale = config.number("emulator.time_scale");
    backend = std::make_unique<env::ModbusBackend>(mo);
  } else {
    backend = std::make_unique<env::SimBackend>(c.battery, config.thermal(), config.initial_thermal());
  }
  SignalScope signals;
  const auto port = config.integer("env_server.port");
  if (port < 0 || port > 65535) throw ConfigError("env_server.port out of range");
  auto server = env::EnvServer::start(c, *backend, static_cast<std::uint16_t>(port));
  out << "environment server (" << backend->kind() << ", " << format_date(day) << ") listening on 127.0.0.1:"
      << server->port() << "\n";
  out.flush();
  wait_for_stop(run_for_s);
  server->stop();
  return exit_ok;
}

int exit_code_for(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    err << "config error: " << x.what() << "\n";
    return exit_user;
  } catch (const ParseError& x) {
    err << "parse error: " << x.what() << "\n";
    return exit_user;
  } catch (const ValidationError& x) {
    err << "validation error: " << x.what() << "\n";
    return exit_user;
  } catch (const NotFoundError& x) {
    err << "not found: " << x.what() << "\n";
    return exit_user;
  } catch (const ArgumentError& x) {
    err << "invalid argument: " << x.what() << "\n";
    return exit_user;
  } catch (const RangeError& x) {
    err << "out of range: " << x.what() << "\n";
    return exit_user;
  } catch (const TransportError& x) {
    err << "transport error: " << x.what() << "\n";
    return exit_environment;
  } catch (const std::filesystem::filesystem_error& x) {
    err << "io error: " << x.what() << "\n";
    return exit_environment;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << "\n";
    return exit_environment;
  }
}

}  // namespace

void request_stop() { g_stop.store(true); }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Desk-scale home energy testbed: train, serve the emulated ESS/HVAC plant, transfer, fetch prices"};
  app.footer("\n" + defaults_help());
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "INI configuration file");
  app.add_option("--set", overrides, "override one key: section.key=value (repeatable)");

  auto* train = app.add_subcommand("train", "train the Q-learning policy on the ideal simulator");
  long long episodes = 0, seed = 0;
  std::string out_path;
  auto* o_episodes = train->add_option("--episodes", episodes, "training episodes [train.episodes]");
  auto* o_seed = train->add_option("--seed", seed, "training seed [train.seed]");
  auto* o_out = train->add_option("--out", out_path, "policy output path (default: inside the run directory)");

  auto* serve_hw = app.add_subcommand("serve-hw", "serve the emulated ESS/HVAC plant over MODBUS/TCP");
  long long hw_port = 0, hw_seed = 0;
  double time_scale = 0, run_for = 0;
  bool hw_ideal = false;
  auto* o_hw_port = serve_hw->add_option("--port", hw_port, "listen port [emulator.port]");
  auto* o_time_scale = serve_hw->add_option("--time-scale", time_scale, "emulated/wall time [emulator.time_scale]");
  auto* o_hw_seed = serve_hw->add_option("--seed", hw_seed, "plant noise seed [emulator.seed]");
  serve_hw->add_flag("--ideal", hw_ideal, "serve the ideal battery [emulator.ideal]");
  serve_hw->add_option("--run-for", run_for, "stop after this many wall seconds (0: until interrupted)");

  auto* transfer = app.add_subcommand("transfer", "evaluate a policy in simulation and on the emulator");
  std::string policy_path, hw_addr, report_dir;
  long long transfer_days = 0;
  transfer->add_option("--policy", policy_path, "policy file written by train")->required();
  auto* o_days = transfer->add_option("--days", transfer_days, "evaluation days [transfer.days]");
  auto* o_hw = transfer->add_option("--hw", hw_addr, "emulator host:port [emulator.host/port]");
  auto* o_report = transfer->add_option("--out", report_dir, "report directory (default: the run directory)");

  auto* fetch = app.add_subcommand("fetch-prices", "fetch or revalidate one day of hourly day-ahead prices");
  std::string endpoint, fixture, date, fetch_out, area;
  auto* o_endpoint = fetch->add_option("--endpoint", endpoint, "day-ahead endpoint URL [prices.endpoint]");
  auto* o_fixture = fetch->add_option("--fixture", fixture, "revalidate an existing fixture instead");
  o_endpoint->excludes(o_fixture);
  auto* o_date = fetch->add_option("--date", date, "UTC day, YYYY-MM-DD");
  fetch->add_option("--out", fetch_out, "output CSV")->required();
  auto* o_area = fetch->add_option("--area", area, "bidding zone [prices.area]");

  auto* serve_env = app.add_subcommand("serve-env", "serve one arbitrage environment to remote controllers");
  long long env_port = 0;
  std::string env_hw, env_date;
  bool env_ideal = false;
  double env_run_for = 0;
  auto* o_env_port = serve_env->add_option("--port", env_port, "listen port [env_server.port]");
  auto* o_env_hw = serve_env->add_option("--hw", env_hw, "use the emulator at host:port as the plant");
  serve_env->add_flag("--ideal", env_ideal, "use the ideal simulator");
  auto* o_env_date = serve_env->add_option("--date", env_date, "episode day [transfer.from]");
  serve_env->add_option("--run-for", env_run_for, "stop after this many wall seconds (0: until interrupted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return exit_user;
  }

  try {
    Config config = config_path.empty() ? Config() : Config::load(config_path);
    for (const auto& o : overrides) config.set_override(o);
    auto opt = [](CLI::Option* o, const std::string& v) { return o->count() ? std::optional<std::string>(v) : std::nullopt; };

    if (*train) {
      if (o_episodes->count()) config.set("train.episodes", std::to_string(episodes));
      if (o_seed->count()) config.set("train.seed", std::to_string(seed));
      return cmd_train(config, opt(o_out, out_path), out);
    }
    if (*serve_hw) {
      if (o_hw_port->count()) config.set("emulator.port", std::to_string(hw_port));
      if (o_time_scale->count()) config.set("emulator.time_scale", std::to_string(time_scale));
      if (o_hw_seed->count()) config.set("emulator.seed", std::to_string(hw_seed));
      if (hw_ideal) config.set("emulator.ideal", "true");
      return cmd_serve_hw(config, run_for, out);
    }
    if (*transfer) {
      if (o_days->count()) config.set("transfer.days", std::to_string(transfer_days));
      return cmd_transfer(config, policy_path, opt(o_hw, hw_addr), opt(o_report, report_dir), out, err);
    }
    if (*fetch) {
      if (o_area->count()) config.set("prices.area", area);
      return cmd_fetch_prices(config, opt(o_endpoint, endpoint), opt(o_fixture, fixture), opt(o_date, date),
                              fetch_out, out);
    }
    if (*serve_env) {
      if (o_env_port->count()) config.set("env_server.port", std::to_string(env_port));
      return cmd_serve_env(config, opt(o_env_hw, env_hw), env_ideal, opt(o_env_date, env_date), env_run_for, out);
    }
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
  return exit_user;
}

}  // namespace hlgym::cli
