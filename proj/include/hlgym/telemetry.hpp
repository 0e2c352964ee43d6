#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlgym/episode.hpp"
#include "hlgym/random.hpp"
#include "hlgym/time_grid.hpp"

namespace hlgym::telemetry {

inline constexpr const char* csv_header =
    "step,timestamp,soc,price_eur_mwh,action,setpoint_kw,delivered_kw,temp_c,reward_eur";

struct StepLogRow {
  std::int64_t step = 0;
  Timestamp timestamp;
  double soc = 0.0;
  double price_eur_mwh = 0.0;
  std::int64_t action = 0;
  double setpoint_kw = 0.0;
  double delivered_kw = 0.0;
  double temp_c = 0.0;
  double reward_eur = 0.0;

  friend bool operator==(const StepLogRow&, const StepLogRow&) = default;
};

// Line-oriented append-only file. Every append is a single write(2) of one
// complete line, so a crash leaves a readable prefix.
class AppendLog {
 public:
  explicit AppendLog(const std::filesystem::path& path, bool sync = false);
  AppendLog(AppendLog&& other) noexcept;
  AppendLog& operator=(AppendLog&&) = delete;
  AppendLog(const AppendLog&) = delete;
  ~AppendLog();

  // Throws LoggingError; earlier lines stay intact.
  void append(const std::string& line);
  void close();
  bool is_open() const noexcept { return fd_ >= 0; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  bool sync_ = false;
};

// Crockford base32, 26 chars: 48-bit millisecond time then 80 random bits.
std::string make_run_id();

// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

struct RunManifest {
  std::string run_id;
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string code_version;
  std::string started_at;
  std::string ended_at;
  std::string backend;
  std::string status = "running";

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

std::string code_version();

// One run directory: runs/<run-id>/{manifest.json, steps.log, export.csv}.
class Run {
 public:
  Run(const std::filesystem::path& dir, RunManifest manifest);

  const std::string& id() const noexcept { return manifest_.run_id; }
  const RunManifest& manifest() const noexcept { return manifest_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  void log_step(const StepLogRow& row);
  void log_episode(const EpisodeRecord& record, std::int64_t step_offset = 0);
  // Free-form event line in events.log (training curves and the like).
  void log_event(const nlohmann::json& event);
  // Writes ended_at and status into the manifest and closes the logs.
  void finalize(const std::string& status = "finished");
  // Closes the step log without touching the manifest, as a crash would.
  void abandon();

 private:
  void write_manifest() const;

  std::filesystem::path dir_;
  RunManifest manifest_;
  AppendLog steps_;
  std::optional<AppendLog> events_;
};

class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  Run create_run(const nlohmann::json& config, Seed seed, const std::string& backend);
  bool exists(const std::string& run_id) const;
  RunManifest manifest(const std::string& run_id) const;
  // Complete rows of steps.log; a torn trailing line is ignored.
  std::vector<StepLogRow> read_steps(const std::string& run_id) const;
  // Writes runs/<id>/export.csv and returns its path. Throws NotFoundError.
  std::filesystem::path export_csv(const std::string& run_id) const;

 private:
  std::filesystem::path root_;
};

std::string format_csv_row(const StepLogRow& row);

}  // namespace hlgym::telemetry
