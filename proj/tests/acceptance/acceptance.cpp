// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails. An optional argument filters criteria
// by substring.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hlgym/battery.hpp"
#include "hlgym/control/dp.hpp"
#include "hlgym/control/policy.hpp"
#include "hlgym/control/qlearning.hpp"
#include "hlgym/control/transfer.hpp"
#include "hlgym/env/backend.hpp"
#include "hlgym/errors.hpp"
#include "hlgym/modbus/emulator.hpp"
#include "hlgym/modbus/frame.hpp"
#include "hlgym/modbus/registers.hpp"
#include "hlgym/net/socket.hpp"
#include "hlgym/prices.hpp"
#include "hlgym/telemetry.hpp"
#include "hlgym/thermal.hpp"
#include "oracles.hpp"

using namespace hlgym;
using namespace hlgym::control;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// -- oracle exactness ---------------------------------------------------------

DPProblem commensurate(const std::vector<double>& prices, double soc0) {
  DPProblem p;
  for (double x : prices) p.prices.emplace_back(x);
  p.dt_h = 1.0;
  p.battery.ideal = true;
  p.battery.capacity_kwh = 2.0;
  p.battery.p_max_kw = 1.0;
  p.battery.eta_charge = p.battery.eta_discharge = 1.0;
  p.battery.soc_min = 0.0;
  p.battery.soc_max = 1.0;
  p.initial_soc = soc0;
  return p;
}

Outcome oracle_exactness() {
  const auto t0 = Clock::now();
  Rng rng(Seed{20230101});
  const oracle::BruteForce brute;
  int exact = 0;
  const int instances = 200;
  for (int k = 0; k < instances; ++k) {
    const std::size_t n = 1 + rng.index(8);
    std::vector<double> prices;
    for (std::size_t i = 0; i < n; ++i) prices.push_back(rng.uniform(-50.0, 250.0));
    const double soc0 = 0.5 * static_cast<double>(rng.index(3));
    if (dp_solve(commensurate(prices, soc0), 5).optimal_profit == brute.best(prices, soc0)) ++exact;
  }
  const double example = dp_solve(commensurate({10, 10, 50, 50}, 0.0), 5).optimal_profit;
  const bool example_ok = example == brute.best({10, 10, 50, 50}, 0.0) &&
                          std::abs(example - 0.08) <= 4 * std::numeric_limits<double>::epsilon() * 0.08;
  const double t = seconds_since(t0);
  return {exact == instances && example_ok && t < 5.0,
          std::to_string(exact) + "/" + std::to_string(instances) + " bit-identical, [10,10,50,50] -> " +
              fmt("%.17g", example) + " EUR, " + fmt("%.2f", t) + " s"};
}

// -- learning adequacy --------------------------------------------------------

Outcome learning_adequacy() {
  const auto t0 = Clock::now();
  env::ArbitrageEnvConfig c;
  c.prices = resample(two_tier_day(c.grid.start(), 20.0, 120.0), c.grid);
  c.battery.ideal = true;
  env::SimBackend backend(c.battery);
  TrainOptions o;
  o.episodes = 2000;
  const auto r = train(backend, c, {{c.grid, c.prices}}, o, Seed{1});
  const QPolicy policy(r.table, r.bins, c.action_set_kw, "");
  env::ArbitrageEnv env(c, backend);
  const double got = evaluate(policy, env, Seed{0}).total_reward();
  DPProblem p;
  p.prices = c.prices;
  p.battery = c.battery;
  p.initial_soc = c.initial_soc;
  const double best = dp_solve(p).optimal_profit;
  const double t = seconds_since(t0);
  return {got >= 0.9 * best && t < 60.0,
          "greedy " + fmt("%.4f", got) + " EUR vs dp " + fmt("%.4f", best) + " EUR = " +
              fmt("%.1f", 100 * got / best) + " % after 2000 episodes, " + fmt("%.1f", t) + " s"};
}

// -- sim-to-real gap ----------------------------------------------------------

Outcome sim_to_real_gap() {
  const auto t0 = Clock::now();
  const auto year = synthetic_belpex_year(2023, Seed{2023});
  const auto train_days = split_days(year.slice(make_utc(2023, 1, 1), make_utc(2023, 12, 28)), 900);
  const auto eval_days = split_days(year.slice(make_utc(2023, 12, 28), make_utc(2024, 1, 1)), 900);
  env::ArbitrageEnvConfig base;
  base.battery.ideal = true;
  env::SimBackend trainer(base.battery);
  TrainOptions o;
  o.episodes = 2000;
  const auto r = train(trainer, base, train_days, o, Seed{1});
  const QPolicy policy(r.table, r.bins, base.action_set_kw, "");

  auto run = [&](bool ideal, TransferReport& out, std::string& error) {
    try {
      modbus::EmulatorConfig ec;
      ec.battery.ideal = ideal;
      ec.port = 0;
      ec.start = eval_days.front().grid.start();
      auto server = modbus::EmulatorServer::start(ec);
      env::ModbusBackendOptions mo;
      mo.port = server->port();
      mo.time_scale = ec.time_scale;
      env::ModbusBackend hw(mo);
      env::SimBackend sim(base.battery);
      out = run_transfer(policy, base, eval_days, sim, hw, {4, Seed{7}});
    } catch (const std::exception& e) {
      error = e.what();
    }
  };
  TransferReport real, ideal;
  std::string err_real, err_ideal;
  std::thread a([&] { run(false, real, err_real); });
  std::thread b([&] { run(true, ideal, err_ideal); });
  a.join();
  b.join();
  const double t = seconds_since(t0);
  if (!err_real.empty() || !err_ideal.empty()) return {false, "run failed: " + err_real + " " + err_ideal};
  const bool ok = real.reward_real < real.reward_sim && real.gap_percent > 0.5 && real.gap_percent < 10.0 &&
                  std::abs(ideal.gap_percent) < 0.1 && !real.truncated && !ideal.truncated && t < 300.0;
  return {ok, "non-ideal: sim " + fmt("%.4f", real.reward_sim) + " real " + fmt("%.4f", real.reward_real) +
                  " gap " + fmt("%.3f", real.gap_percent) + " %; ideal emulator gap " +
                  fmt("%.3f", ideal.gap_percent) + " %; " + fmt("%.0f", t) + " s"};
}

// -- charge taper -------------------------------------------------------------

Outcome charge_taper() {
  modbus::EmulatorConfig ec;
  ec.battery.p_max_kw = 1.0;
  ec.battery.tracking_noise_std_kw = 0.0;
  ec.port = 0;
  ec.time_scale = 14400;
  auto server = modbus::EmulatorServer::start(ec);
  env::ModbusBackendOptions mo;
  mo.port = server->port();
  mo.time_scale = ec.time_scale;
  env::ModbusBackend hw(mo);

  env::ArbitrageEnvConfig c;
  c.battery = ec.battery;
  c.prices.assign(96, EnergyPrice(50.0));
  env::ArbitrageEnv env(c, hw);
  auto last = env.reset(Seed{0});
  while (!last.terminated) last = env.step(2);

  int tapered = 0, flat = 0, bad = 0;
  double soc_end = 0.0;
  for (const auto& row : env.record().rows()) {
    const double soc = row.observation[0];  // SoC when the step's setpoint was applied
    const double p = row.delivered.kw();
    if (soc > c.battery.taper_start_soc) {
      ++tapered;
      if (!(p < 1.0)) ++bad;
    } else if (row.soc <= c.battery.taper_start_soc) {
      ++flat;
      if (std::abs(p - 1.0) > 0.01) ++bad;
    } else if (p > 1.0 + 0.01) {
      ++bad;  // step that crosses the taper start
    }
    soc_end = row.soc;
  }
  const bool full = soc_end >= c.battery.soc_max - 1e-3;
  return {bad == 0 && tapered > 0 && flat > 0 && full,
          std::to_string(flat) + " steps at 1 kW below taper start, " + std::to_string(tapered) +
              " tapered steps all < 1 kW, " + std::to_string(bad) + " violations, final soc " + fmt("%.4f", soc_end)};
}

// -- thermostat cycling -------------------------------------------------------

Outcome thermostat_cycles() {
  modbus::EmulatorConfig ec;
  ec.port = 0;
  modbus::EmulatorModel model(ec);
  const auto& map = ec.map;
  const auto& temp_reg = map.at(modbus::reg::room_temp);
  const ThermalParams& tp = ec.thermal;
  const double eps = thermal_overshoot_bound(tp, ec.tick_s / 3600.0);
  const double quantum = temp_reg.scale / 2;
  const auto ticks = static_cast<int>(48 * 3600 / ec.tick_s);

  int cycles = 0;
  bool prev_on = model.snapshot().heater_on;
  bool settled = false;
  double lo = INFINITY, hi = -INFINITY;
  for (int k = 0; k < ticks; ++k) {
    model.tick();
    const double temp = modbus::decode_value(temp_reg, model.read_raw(temp_reg.address));
    const bool on = model.snapshot().heater_on;
    if (prev_on && !on) ++cycles;
    prev_on = on;
    if (!settled && temp >= tp.setpoint_c - tp.hysteresis_c) settled = true;
    if (settled) {
      lo = std::min(lo, temp);
      hi = std::max(hi, temp);
    }
  }
  const double bound = tp.hysteresis_c + eps + quantum;
  const bool inside = settled && lo >= tp.setpoint_c - bound && hi <= tp.setpoint_c + bound;
  return {cycles >= 3 && inside, std::to_string(cycles) + " on/off cycles in 48 h, settled range [" +
                                     fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "] C within " +
                                     fmt("%.2f", tp.setpoint_c) + " +/- " + fmt("%.4f", bound)};
}

// -- protocol conformance -----------------------------------------------------

struct RawClient {
  net::Socket socket;
  explicit RawClient(std::uint16_t port)
      : socket(net::Socket::connect("127.0.0.1", port, std::chrono::milliseconds(2000))) {}

  // Hand-built MBAP frame; returns (transaction id, pdu) of the reply.
  std::pair<std::uint16_t, std::vector<std::uint8_t>> call(std::uint16_t tid, const std::vector<std::uint8_t>& pdu) {
    std::vector<std::uint8_t> out{static_cast<std::uint8_t>(tid >> 8), static_cast<std::uint8_t>(tid), 0, 0,
                                  static_cast<std::uint8_t>((pdu.size() + 1) >> 8),
                                  static_cast<std::uint8_t>(pdu.size() + 1), 1};
    out.insert(out.end(), pdu.begin(), pdu.end());
    socket.write_all(out);
    std::vector<std::uint8_t> head(7);
    if (!socket.read_exact(head, std::chrono::milliseconds(2000))) throw TransportError("closed");
    const std::size_t len = static_cast<std::size_t>(head[4] << 8 | head[5]);
    if (head[2] != 0 || head[3] != 0 || len < 2) throw ProtocolError("bad header");
    std::vector<std::uint8_t> body(len - 1);
    if (!socket.read_exact(body, std::chrono::milliseconds(2000))) throw TransportError("closed");
    return {static_cast<std::uint16_t>(head[0] << 8 | head[1]), body};
  }
};

std::vector<std::uint8_t> u16_pdu(std::uint8_t fc, std::uint16_t a, std::uint16_t b) {
  return {fc, static_cast<std::uint8_t>(a >> 8), static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b >> 8),
          static_cast<std::uint8_t>(b)};
}

Outcome protocol_conformance() {
  const auto map = modbus::default_register_map();
  // Codec: every raw word of every register survives decode -> encode.
  long codec_bad = 0;
  for (const auto& spec : map.registers()) {
    for (std::uint32_t raw = 0; raw <= 0xFFFF; ++raw) {
      const double v = modbus::decode_value(spec, static_cast<std::uint16_t>(raw));
      if (modbus::encode_value(spec, v) != raw) ++codec_bad;
    }
  }
  const auto& power = map.at(modbus::reg::battery_setpoint);
  const bool negative_ok = modbus::encode_value(power, -1.5) == 0xFF6A &&
                           modbus::decode_value(power, 0xFF6A) == -1.5;

  modbus::EmulatorConfig ec;
  ec.port = 0;
  auto server = modbus::EmulatorServer::start(ec);
  RawClient c(server->port());
  auto exception_of = [&](const std::vector<std::uint8_t>& pdu) -> int {
    const auto [tid, reply] = c.call(0x1234, pdu);
    if (tid != 0x1234 || reply.size() != 2 || reply[0] != (pdu[0] | 0x80)) return -1;
    return reply[1];
  };
  const std::uint16_t read_only = map.at(modbus::reg::battery_power).address;
  const bool ex_ok = exception_of(u16_pdu(0x03, 0xFFFF, 1)) == 0x02 &&
                     exception_of(u16_pdu(0x04, 0, 1)) == 0x01 &&
                     exception_of(u16_pdu(0x06, read_only, 5)) == 0x02 &&
                     exception_of(u16_pdu(0x03, 0, 0)) == 0x03;

  // Fuzz: random valid and invalid requests; every reply must echo its
  // transaction id and have the expected shape.
  Rng rng(Seed{99});
  const auto n_regs = static_cast<std::uint16_t>(map.registers().size());
  const std::uint16_t setpoint = power.address;
  long tid_mismatch = 0, shape_bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto tid = static_cast<std::uint16_t>(rng.next());
    std::vector<std::uint8_t> pdu;
    int expect_ex = 0;
    switch (rng.index(5)) {
      case 0: {
        const auto a = static_cast<std::uint16_t>(rng.index(n_regs));
        pdu = u16_pdu(0x03, a, static_cast<std::uint16_t>(1 + rng.index(n_regs - a)));
        break;
      }
      case 1:
        pdu = u16_pdu(0x06, setpoint, static_cast<std::uint16_t>(static_cast<std::int16_t>(rng.index(501)) - 250));
        break;
      case 2:
        pdu = u16_pdu(0x03, static_cast<std::uint16_t>(n_regs + rng.index(1000)), 1);
        expect_ex = 0x02;
        break;
      case 3:
        pdu = u16_pdu(0x06, read_only, 0);
        expect_ex = 0x02;
        break;
      default:
        pdu = u16_pdu(static_cast<std::uint8_t>(0x01 + rng.index(2)), 0, 1);  // 0x01/0x02 unsupported
        expect_ex = 0x01;
        break;
    }
    const auto [got, reply] = c.call(tid, pdu);
    if (got != tid) ++tid_mismatch;
    if (expect_ex) {
      if (reply.size() != 2 || reply[0] != (pdu[0] | 0x80) || reply[1] != expect_ex) ++shape_bad;
    } else if (pdu[0] == 0x03) {
      const std::size_t count = static_cast<std::size_t>(pdu[3] << 8 | pdu[4]);
      if (reply.size() != 2 + 2 * count || reply[0] != 0x03 || reply[1] != 2 * count) ++shape_bad;
    } else if (reply != pdu) {
      ++shape_bad;
    }
  }
  const bool ok = codec_bad == 0 && negative_ok && ex_ok && tid_mismatch == 0 && shape_bad == 0;
  return {ok, "codec mismatches " + std::to_string(codec_bad) + ", -1.50 kW <-> 0xFF6A " +
                  (negative_ok ? "ok" : "BAD") + ", exception codes " + (ex_ok ? "ok" : "BAD") +
                  ", 10000-request fuzz: " + std::to_string(tid_mismatch) + " tid mismatches, " +
                  std::to_string(shape_bad) + " malformed replies"};
}

// -- determinism --------------------------------------------------------------

std::string run_logged(const std::filesystem::path& root) {
  const auto year = synthetic_belpex_year(2023, Seed{2023});
  const auto days = split_days(year.slice(make_utc(2023, 6, 1), make_utc(2023, 6, 8)), 900);
  env::ArbitrageEnvConfig base;
  base.battery.ideal = true;
  env::SimBackend trainer(base.battery);
  TrainOptions o;
  o.episodes = 300;
  const auto r = train(trainer, base, days, o, Seed{5});
  const QPolicy policy(r.table, r.bins, base.action_set_kw, "");

  telemetry::RunStore store(root);
  auto run = store.create_run({{"episodes", 300}, {"seed", 5}}, Seed{5}, "sim");
  env::SimBackend plant{BatteryParams{}};
  double soc = base.initial_soc;
  std::int64_t offset = 0;
  for (std::size_t d = 0; d < 4; ++d) {
    auto cfg = base;
    cfg.battery = BatteryParams{};
    cfg.grid = days[d].grid;
    cfg.prices = days[d].prices;
    cfg.initial_soc = soc;
    env::ArbitrageEnv env(cfg, plant);
    const auto rec = evaluate(policy, env, Seed{42 + d});
    run.log_episode(rec, offset);
    offset += cfg.grid.n_steps();
    soc = rec.rows().back().soc;
  }
  run.finalize();
  std::ifstream in(run.dir() / "steps.log", std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / ("hlgym-accept-" + telemetry::make_run_id());
  const auto a = run_logged(root / "a");
  const auto b = run_logged(root / "b");
  std::filesystem::remove_all(root);
  const bool ok = !a.empty() && a == b;
  return {ok, "two virtual-clock runs: " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                  " bytes of step log, " + (a == b ? "byte-identical" : "DIFFERENT")};
}

// -- conservation -------------------------------------------------------------

Outcome conservation() {
  const BatteryParams p;
  Rng rng(Seed{4242});
  BatteryState s{0.5, PowerKW(0.0)};
  double e_in = 0.0, e_out = 0.0, throughput = 0.0;
  long out_of_bounds = 0;
  const double dts[] = {10.0 / 3600, 0.25, 1.0};
  for (int k = 0; k < 10000; ++k) {
    const double dt = dts[rng.index(3)];
    const auto res = battery_step(p, s, PowerKW(rng.uniform(-3.0, 3.0)), dt, rng.normal());
    if (res.state.soc < p.soc_min || res.state.soc > p.soc_max) ++out_of_bounds;
    const double d = res.delivered.kw();
    (d >= 0 ? e_in : e_out) += std::abs(d) * dt;
    throughput += std::abs(d) * dt;
    s = res.state;
  }
  const double stored = (s.soc - 0.5) * p.capacity_kwh;
  const double accounted = p.eta_charge * e_in - e_out / p.eta_discharge;
  const double rel = std::abs(stored - accounted) / throughput;
  return {out_of_bounds == 0 && rel <= 1e-9,
          "10000 random setpoints: " + std::to_string(out_of_bounds) + " SoC bound violations, energy closure error " +
              fmt("%.2e", rel) + " relative to " + fmt("%.1f", throughput) + " kWh throughput"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle-exactness", oracle_exactness},
      {"learning-adequacy", learning_adequacy},
      {"sim-to-real-gap", sim_to_real_gap},
      {"charge-taper", charge_taper},
      {"thermostat-cycling", thermostat_cycles},
      {"protocol-conformance", protocol_conformance},
      {"determinism", determinism},
      {"conservation-fuzz", conservation},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!filter.empty() && name.find(filter) == std::string::npos) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
