#include "hlgym/telemetry.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "hlgym/errors.hpp"

#ifndef HLGYM_VERSION
#define HLGYM_VERSION "0.0.0"
#endif

namespace hlgym::telemetry {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_iso() {
  return format_iso8601(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json row_json(const StepLogRow& r) {
  return {{"step", r.step},           {"timestamp", format_iso8601(r.timestamp)},
          {"soc", r.soc},             {"price_eur_mwh", r.price_eur_mwh},
          {"action", r.action},       {"setpoint_kw", r.setpoint_kw},
          {"delivered_kw", r.delivered_kw}, {"temp_c", r.temp_c},
          {"reward_eur", r.reward_eur}};
}

StepLogRow row_from_json(const json& j) {
  StepLogRow r;
  r.step = j.at("step").get<std::int64_t>();
  r.timestamp = parse_iso8601(j.at("timestamp").get<std::string>());
  r.soc = j.at("soc").get<double>();
  r.price_eur_mwh = j.at("price_eur_mwh").get<double>();
  r.action = j.at("action").get<std::int64_t>();
  r.setpoint_kw = j.at("setpoint_kw").get<double>();
  r.delivered_kw = j.at("delivered_kw").get<double>();
  r.temp_c = j.at("temp_c").get<double>();
  r.reward_eur = j.at("reward_eur").get<double>();
  return r;
}

}  // namespace

AppendLog::AppendLog(const fs::path& path, bool sync) : path_(path), sync_(sync) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw LoggingError("cannot open log " + path.string() + ": " + std::strerror(errno));
}

AppendLog::AppendLog(AppendLog&& other) noexcept
    : path_(std::move(other.path_)), fd_(other.fd_), sync_(other.sync_) {
  other.fd_ = -1;
}

AppendLog::~AppendLog() { close(); }

void AppendLog::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void AppendLog::append(const std::string& line) {
  if (fd_ < 0) throw LoggingError("log " + path_.string() + " is closed");
  std::string buf = line;
  buf.push_back('\n');
  std::size_t done = 0;
  while (done < buf.size()) {
    const ssize_t n = ::write(fd_, buf.data() + done, buf.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw LoggingError("write to " + path_.string() + " failed: " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  if (sync_ && ::fdatasync(fd_) != 0) {
    throw LoggingError("fdatasync on " + path_.string() + " failed: " + std::strerror(errno));
  }
}

std::string make_run_id() {
  static constexpr char alphabet[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";
  const auto ms = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                 std::chrono::system_clock::now().time_since_epoch())
                                                 .count());
  std::random_device rd;
  const std::uint64_t hi = (static_cast<std::uint64_t>(rd()) << 32 | rd()) & 0xFFFF;  // 16 bits
  const std::uint64_t lo = static_cast<std::uint64_t>(rd()) << 32 | rd();            // 64 bits
  std::string id(26, '0');
  // 10 chars of time (50 bits, top 2 zero), 16 chars of randomness (80 bits).
  for (int i = 9; i >= 0; --i) id[static_cast<std::size_t>(9 - i)] = alphabet[(ms >> (5 * i)) & 31];
  for (int i = 0; i < 16; ++i) {
    const int bit = 79 - 5 * i - 4;  // low bit index of this 5-bit group
    std::uint64_t v;
    if (bit >= 64) {
      v = (hi >> (bit - 64)) & 31;
    } else if (bit + 4 < 64) {
      v = (lo >> bit) & 31;
    } else {
      v = ((hi << (64 - bit)) | (lo >> bit)) & 31;
    }
    id[static_cast<std::size_t>(10 + i)] = alphabet[v];
  }
  return id;
}

std::string config_hash(const json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string code_version() { return HLGYM_VERSION; }

json RunManifest::to_json() const {
  return {{"run_id", run_id},   {"config", config},         {"config_hash", config_hash},
          {"seed", seed},       {"code_version", code_version}, {"started_at", started_at},
          {"ended_at", ended_at}, {"backend", backend},     {"status", status}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.run_id = j.at("run_id");
  m.config = j.at("config");
  m.config_hash = j.at("config_hash");
  m.seed = j.at("seed");
  m.code_version = j.at("code_version");
  m.started_at = j.at("started_at");
  m.ended_at = j.at("ended_at");
  m.backend = j.at("backend");
  m.status = j.at("status");
  return m;
}

Run::Run(const fs::path& dir, RunManifest manifest)
    : dir_(dir), manifest_(std::move(manifest)), steps_(dir / "steps.log") {
  write_manifest();
}

void Run::write_manifest() const {
  const fs::path tmp = dir_ / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << manifest_.to_json().dump(2) << '\n';
    if (!out) throw LoggingError("cannot write manifest in " + dir_.string());
  }
  fs::rename(tmp, dir_ / "manifest.json");
}

void Run::log_step(const StepLogRow& row) { steps_.append(row_json(row).dump()); }

void Run::log_episode(const EpisodeRecord& record, std::int64_t step_offset) {
  for (const auto& r : record.rows()) {
    StepLogRow row;
    row.step = r.step + step_offset;
    row.timestamp = record.grid().timestamp_of(r.step);
    row.soc = r.soc;
    row.price_eur_mwh = r.price.eur_per_mwh();
    row.action = static_cast<std::int64_t>(r.action);
    row.setpoint_kw = r.setpoint.kw();
    row.delivered_kw = r.delivered.kw();
    row.temp_c = r.temp_c;
    row.reward_eur = r.reward_eur;
    log_step(row);
  }
}

void Run::log_event(const json& event) {
  if (!events_) events_.emplace(dir_ / "events.log");
  events_->append(event.dump());
}

void Run::finalize(const std::string& status) {
  manifest_.ended_at = now_iso();
  manifest_.status = status;
  write_manifest();
  steps_.close();
  if (events_) events_->close();
}

void Run::abandon() {
  steps_.close();
  if (events_) events_->close();
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw LoggingError("cannot create run store " + root_.string() + ": " + ec.message());
}

Run RunStore::create_run(const json& config, Seed seed, const std::string& backend) {
  RunManifest m;
  fs::path dir;
  do {
    m.run_id = make_run_id();
    dir = root_ / m.run_id;
  } while (fs::exists(dir));
  fs::create_directories(dir);
  m.config = config;
  m.config_hash = config_hash(config);
  m.seed = seed.value;
  m.code_version = code_version();
  m.started_at = now_iso();
  m.backend = backend;
  return Run(dir, std::move(m));
}

bool RunStore::exists(const std::string& run_id) const {
  return !run_id.empty() && run_id.find('/') == std::string::npos &&
         fs::exists(root_ / run_id / "manifest.json");
}

RunManifest RunStore::manifest(const std::string& run_id) const {
  if (!exists(run_id)) throw NotFoundError("unknown run '" + run_id + "'");
  std::ifstream in(root_ / run_id / "manifest.json");
  return RunManifest::from_json(json::parse(in));
}

std::vector<StepLogRow> RunStore::read_steps(const std::string& run_id) const {
  if (!exists(run_id)) throw NotFoundError("unknown run '" + run_id + "'");
  std::ifstream in(root_ / run_id / "steps.log", std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<StepLogRow> rows;
  std::size_t pos = 0;
  while (true) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // torn or empty tail
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      rows.push_back(row_from_json(json::parse(line)));
    } catch (const std::exception&) {
      break;
    }
  }
  return rows;
}

std::string format_csv_row(const StepLogRow& r) {
  std::string out = std::to_string(r.step);
  out += ',' + format_iso8601(r.timestamp);
  out += ',' + fmt6(r.soc);
  out += ',' + fmt6(r.price_eur_mwh);
  out += ',' + std::to_string(r.action);
  out += ',' + fmt6(r.setpoint_kw);
  out += ',' + fmt6(r.delivered_kw);
  out += ',' + fmt6(r.temp_c);
  out += ',' + fmt6(r.reward_eur);
  return out;
}

fs::path RunStore::export_csv(const std::string& run_id) const {
  const auto rows = read_steps(run_id);
  const fs::path path = root_ / run_id / "export.csv";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoggingError("cannot write " + path.string());
  out << csv_header << '\n';
  for (const auto& r : rows) out << format_csv_row(r) << '\n';
  if (!out) throw LoggingError("failed writing " + path.string());
  return path;
}

}  // namespace hlgym::telemetry
