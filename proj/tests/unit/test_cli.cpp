#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "hlgym/control/policy.hpp"
#include "hlgym/env/backend.hpp"
#include "hlgym/errors.hpp"
#include "hlgym/modbus/emulator.hpp"
#include "hlgym/net/socket.hpp"
#include "hlgym/prices.hpp"

using namespace hlgym;
using namespace hlgym::cli;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir = HLGYM_SOURCE_DIR;
const std::string fixture = (source_dir / "data" / "belpex_2023_synthetic.csv").string();

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "hlgym-cli-XXXXXX").string();
    path = ::mkdtemp(tmpl.data());
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Invocation {
  int code = -1;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hlgym");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Invocation r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> base_args(const TempDir& dir) {
  return {"--set", "data.prices=" + fixture, "--set", "data.runs=" + (dir.path / "runs").string()};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// The single run in the store whose backend starts with `backend`.
fs::path only_run(const TempDir& dir, const std::string& backend = "") {
  std::vector<fs::path> runs;
  for (const auto& e : fs::directory_iterator(dir.path / "runs")) {
    const auto m = nlohmann::json::parse(slurp(e.path() / "manifest.json"));
    if (m["backend"].get<std::string>().rfind(backend, 0) == 0) runs.push_back(e.path());
  }
  EXPECT_EQ(runs.size(), 1u);
  return runs.empty() ? fs::path{} : runs.front();
}

}  // namespace

TEST(CliConfig, ShippedDefaultsMatchBuiltIn) {
  const auto shipped = Config::load(source_dir / "config" / "default.ini");
  EXPECT_EQ(shipped.to_ini(), Config().to_ini());
  EXPECT_EQ(shipped.hash(), Config().hash());
}

TEST(CliConfig, RejectsUnknownKeysAndSections) {
  EXPECT_THROW(Config::parse("[battery]\ncapacity = 10\n"), ConfigError);
  EXPECT_THROW(Config::parse("[batteries]\ncapacity_kwh = 10\n"), ConfigError);
  EXPECT_THROW(Config().set_override("battery.nope=1"), ConfigError);
  EXPECT_THROW(Config().set_override("battery.capacity_kwh"), ConfigError);
}

TEST(CliConfig, RejectsMalformedValues) {
  EXPECT_THROW(Config::parse("[battery]\ncapacity_kwh = ten\n"), ConfigError);
  EXPECT_THROW(Config::parse("[train]\nepisodes = 2.5\n"), ConfigError);
  EXPECT_THROW(Config::parse("[battery]\ntaper = maybe\n"), ConfigError);
  EXPECT_THROW(Config::parse("[train]\nfrom = 2023-13-01\n"), ConfigError);
  EXPECT_THROW(Config::parse("[env]\nactions_kw = -1,x\n"), ConfigError);
  EXPECT_THROW(Config::parse("[battery]\nsoc_min = 2\n").battery(false), ConfigError);
}

TEST(CliConfig, EquivalentSpellingsHashEqually) {
  const auto a = Config::parse("[battery]\ncapacity_kwh = 10.0\ntaper = yes\n[env]\nactions_kw = -1.0, 0, 1\n");
  EXPECT_EQ(a.hash(), Config().hash());
  auto b = Config();
  b.set("battery.capacity_kwh", "12");
  EXPECT_NE(b.hash(), Config().hash());
  EXPECT_DOUBLE_EQ(b.battery(false).capacity_kwh, 12.0);
}

TEST(CliConfig, TypedViews) {
  const Config c;
  EXPECT_EQ(c.list("env.actions_kw"), (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_TRUE(c.battery(true).ideal);
  EXPECT_EQ(c.env_template(make_utc(2023, 5, 1), true).grid.n_steps(), 96);
  EXPECT_EQ(c.emulator().port, 15020);
  EXPECT_EQ(c.date("train.to"), make_utc(2023, 12, 28));
}

TEST(Cli, HelpListsDefaultsRegisterMapAndBattery) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("time_scale = 3600"), std::string::npos);
  EXPECT_NE(r.out.find("2 battery_setpoint i16 0.01 kW read_write"), std::string::npos);
  EXPECT_NE(r.out.find("10 kWh, 2.5 kW"), std::string::npos);
  for (const char* cmd : {"train", "serve-hw", "transfer", "fetch-prices", "serve-env"}) {
    EXPECT_NE(r.out.find(cmd), std::string::npos) << cmd;
  }
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"bogus"}).code, 2);
  EXPECT_EQ(invoke({"train", "--episodes", "many"}).code, 2);
  EXPECT_EQ(invoke({"--set", "grid.step=1", "train"}).code, 2);
}

TEST(Cli, TrainMissingFixtureNamesThePath) {
  TempDir dir;
  const auto missing = (dir.path / "absent.csv").string();
  const auto r = invoke({"--set", "data.prices=" + missing, "train", "--episodes", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos);
}

TEST(Cli, TrainWritesPolicyAndManifestWithMatchingHash) {
  TempDir dir;
  const auto policy = dir.path / "policy.txt";
  const auto r = invoke(concat(base_args(dir), {"train", "--episodes", "20", "--seed", "3", "--out", policy.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(policy));
  EXPECT_NE(r.out.find("# effective config, hash"), std::string::npos);
  const auto run = only_run(dir);
  const auto manifest = nlohmann::json::parse(slurp(run / "manifest.json"));
  EXPECT_EQ(manifest["status"], "finished");
  EXPECT_EQ(manifest["config"]["train"]["episodes"], "20");
  EXPECT_EQ(manifest["config_hash"], control::QPolicy::load(policy).config_hash());
  EXPECT_EQ(slurp(run / "policy.txt"), slurp(policy));
  // one training-curve event per episode
  std::ifstream events(run / "events.log");
  int lines = 0;
  for (std::string line; std::getline(events, line);) ++lines;
  EXPECT_EQ(lines, 20);
}

TEST(Cli, TrainSameSeedGivesIdenticalPolicyFiles) {
  TempDir dir;
  const auto a = dir.path / "a.txt", b = dir.path / "b.txt";
  ASSERT_EQ(invoke(concat(base_args(dir), {"train", "--episodes", "30", "--seed", "9", "--out", a.string()})).code, 0);
  ASSERT_EQ(invoke(concat(base_args(dir), {"train", "--episodes", "30", "--seed", "9", "--out", b.string()})).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, TrainUnwritableOutputExitsThree) {
  TempDir dir;
  const auto r = invoke(concat(base_args(dir), {"train", "--episodes", "1", "--out",
                                                (dir.path / "no" / "such" / "dir" / "p.txt").string()}));
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, TransferRejectsBadPolicyFile) {
  TempDir dir;
  const auto bad = dir.path / "bad.txt";
  std::ofstream(bad) << "not a policy\n";
  EXPECT_EQ(invoke(concat(base_args(dir), {"transfer", "--policy", bad.string()})).code, 2);
  EXPECT_EQ(invoke(concat(base_args(dir), {"transfer", "--policy", (dir.path / "none").string()})).code, 2);
}

TEST(Cli, TransferUnreachableEmulatorExitsThree) {
  TempDir dir;
  const auto policy = dir.path / "p.txt";
  ASSERT_EQ(invoke(concat(base_args(dir), {"train", "--episodes", "0", "--out", policy.string()})).code, 0);
  auto probe = net::Socket::listen(0);
  const auto port = probe.local_port();
  probe.close();
  const auto r = invoke(concat(base_args(dir), {"transfer", "--policy", policy.string(), "--hw",
                                                "127.0.0.1:" + std::to_string(port)}));
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, TransferAgainstIdealEmulatorHasNoGap) {
  TempDir dir;
  const auto policy = dir.path / "p.txt";
  ASSERT_EQ(invoke(concat(base_args(dir), {"train", "--episodes", "200", "--out", policy.string()})).code, 0);
  modbus::EmulatorConfig ec;
  ec.battery.ideal = true;
  ec.port = 0;
  ec.time_scale = 36000;
  auto server = modbus::EmulatorServer::start(ec);
  const auto report = dir.path / "report";
  const auto r = invoke(concat(base_args(dir), {"--set", "emulator.time_scale=36000", "transfer", "--policy",
                                                policy.string(), "--days", "1", "--hw",
                                                "127.0.0.1:" + std::to_string(server->port()), "--out",
                                                report.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("reward sim:"), std::string::npos);
  EXPECT_NE(r.out.find("gap:"), std::string::npos);
  for (const char* f : {"summary.txt", "transfer.csv", "sim_steps.csv", "real_steps.csv"}) {
    EXPECT_TRUE(fs::exists(report / f)) << f;
  }
  const auto csv = slurp(report / "transfer.csv");
  std::istringstream total(csv.substr(csv.rfind("total")));
  std::string field;
  for (int i = 0; i < 4; ++i) std::getline(total, field, ',');
  const double gap = std::stod(field);
  EXPECT_LT(std::abs(gap), 0.1);
}

TEST(Cli, TransferTruncatedRunExitsFourWithPartialReport) {
  TempDir dir;
  const auto policy = dir.path / "p.txt";
  ASSERT_EQ(invoke(concat(base_args(dir), {"train", "--episodes", "0", "--out", policy.string()})).code, 0);
  modbus::EmulatorConfig ec;
  ec.port = 0;
  ec.time_scale = 36000;
  auto server = modbus::EmulatorServer::start(ec);
  std::thread killer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    server->stop();
  });
  const auto report = dir.path / "report";
  const auto r = invoke(concat(base_args(dir), {"--set", "emulator.time_scale=36000", "transfer", "--policy",
                                                policy.string(), "--days", "2", "--hw",
                                                "127.0.0.1:" + std::to_string(server->port()), "--out",
                                                report.string()}));
  killer.join();
  EXPECT_EQ(r.code, 4) << r.err;
  EXPECT_TRUE(fs::exists(report / "real_steps.csv"));
  const auto manifest = nlohmann::json::parse(slurp(only_run(dir, "modbus") / "manifest.json"));
  EXPECT_EQ(manifest["status"], "partial");
}

TEST(Cli, FetchPricesFromStubWritesOneDay) {
  TempDir dir;
  PriceStubServer stub(load_fixture(fixture));
  const auto out = dir.path / "day.csv";
  const auto r = invoke({"fetch-prices", "--endpoint", stub.endpoint(), "--date", "2023-03-14", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto day = load_fixture(out);
  EXPECT_EQ(day.size(), 24u);
  EXPECT_EQ(day, load_fixture(fixture).slice(make_utc(2023, 3, 14), make_utc(2023, 3, 15)));
}

TEST(Cli, FetchPricesEndpointDownExitsThree) {
  TempDir dir;
  auto probe = net::Socket::listen(0);
  const auto port = probe.local_port();
  probe.close();
  const auto r = invoke({"--set", "prices.retries=1", "fetch-prices", "--endpoint",
                         "http://127.0.0.1:" + std::to_string(port) + "/dayahead", "--date", "2023-03-14", "--out",
                         (dir.path / "x.csv").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(fs::exists(dir.path / "x.csv"));
}

TEST(Cli, FetchPricesTruncatedDayExitsTwo) {
  TempDir dir;
  PriceStubServer stub(load_fixture(fixture), 0, {0, 3});
  const auto r = invoke({"fetch-prices", "--endpoint", stub.endpoint(), "--date", "2023-03-14", "--out",
                         (dir.path / "x.csv").string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, FetchPricesFixturePassThroughNormalizes) {
  TempDir dir;
  const auto messy = dir.path / "messy.csv";
  {
    std::ofstream out(messy);
    out << "timestamp,price_eur_mwh\r\n";
    for (int h = 0; h < 24; ++h) out << "2023-02-01T" << (h < 10 ? "0" : "") << h << ":00:00Z, " << 50 + h << ".000\r\n";
  }
  const auto a = dir.path / "a.csv", b = dir.path / "b.csv";
  ASSERT_EQ(invoke({"fetch-prices", "--fixture", messy.string(), "--out", a.string()}).code, 0);
  ASSERT_EQ(invoke({"fetch-prices", "--fixture", a.string(), "--out", b.string()}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a).find('\r'), std::string::npos);
  EXPECT_EQ(load_fixture(a).size(), 24u);
  EXPECT_EQ(invoke({"fetch-prices", "--fixture", messy.string(), "--date", "2023-02-02", "--out", a.string()}).code, 2);
}

TEST(Cli, ServeHwPortBusyExitsThree) {
  TempDir dir;
  auto holder = net::Socket::listen(0);
  const auto r = invoke(concat(base_args(dir), {"serve-hw", "--port", std::to_string(holder.local_port())}));
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, ServeHwStopsCleanlyAndFinalizesManifest) {
  TempDir dir;
  auto probe = net::Socket::listen(0);
  const auto port = probe.local_port();
  probe.close();
  Invocation r;
  std::thread server([&] {
    r = invoke(concat(base_args(dir), {"serve-hw", "--port", std::to_string(port), "--time-scale", "36000"}));
  });
  std::optional<net::Socket> client;
  for (int i = 0; i < 100 && !client; ++i) {
    try {
      client = net::Socket::connect("127.0.0.1", port, std::chrono::milliseconds(200));
    } catch (const TransportError&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  ASSERT_TRUE(client.has_value());
  // read holding register 0 (SoC), raw MBAP frame
  const std::vector<std::uint8_t> req{0, 1, 0, 0, 0, 6, 1, 0x03, 0, 0, 0, 1};
  client->write_all(req);
  std::vector<std::uint8_t> reply(11);
  ASSERT_TRUE(client->read_exact(reply, std::chrono::milliseconds(2000)));
  EXPECT_EQ(reply[7], 0x03);
  EXPECT_EQ(reply[8], 2);
  client.reset();
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  request_stop();
  server.join();
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0 soc u16 0.01 % read"), std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(only_run(dir) / "manifest.json"));
  EXPECT_EQ(manifest["status"], "stopped");
  EXPECT_FALSE(manifest["ended_at"].get<std::string>().empty());
}

TEST(Cli, ServeEnvAnswersResetLikeTheNativeEnv) {
  TempDir dir;
  auto probe = net::Socket::listen(0);
  const auto port = probe.local_port();
  probe.close();
  Invocation r;
  std::thread server([&] {
    r = invoke(concat(base_args(dir), {"serve-env", "--ideal", "--port", std::to_string(port), "--date", "2023-06-01"}));
  });
  std::optional<net::Socket> client;
  for (int i = 0; i < 100 && !client; ++i) {
    try {
      client = net::Socket::connect("127.0.0.1", port, std::chrono::milliseconds(200));
    } catch (const TransportError&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  ASSERT_TRUE(client.has_value());
  client->write_all(std::string(R"({"id":1,"cmd":"reset","seed":7})") + "\n");
  net::LineReader reader(*client);
  const auto line = reader.read_line(std::chrono::milliseconds(2000));
  ASSERT_TRUE(line.has_value());
  const auto reply = nlohmann::json::parse(*line);

  const Config config;
  auto c = config.env_template(make_utc(2023, 6, 1), true);
  c.prices = resample(load_fixture(fixture), c.grid);
  env::SimBackend backend(c.battery, config.thermal(), config.initial_thermal());
  env::ArbitrageEnv native(c, backend);
  EXPECT_EQ(reply["id"], 1);
  EXPECT_EQ(reply["observation"].get<std::vector<double>>(), native.reset(Seed{7}).observation);
  client.reset();
  request_stop();
  server.join();
  EXPECT_EQ(r.code, 0) << r.err;
}
