#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hlgym/control/policy.hpp"
#include "hlgym/control/qlearning.hpp"
#include "hlgym/env/arbitrage_env.hpp"
#include "hlgym/env/backend.hpp"
#include "hlgym/episode.hpp"

namespace hlgym::control {

struct DayResult {
  Timestamp day;
  double reward_sim = 0.0;
  double reward_real = 0.0;
  std::int64_t steps_sim = 0;
  std::int64_t steps_real = 0;
};

struct TransferReport {
  double reward_sim = 0.0;   // EUR
  double reward_real = 0.0;  // EUR
  double gap_percent = 0.0;  // 100 * (sim - real) / |sim|
  std::vector<DayResult> days;
  std::vector<EpisodeRecord> sim_records;
  std::vector<EpisodeRecord> real_records;
  std::string sim_backend;
  std::string real_backend;
  bool truncated = false;
  std::string error;

  std::string summary() const;
  // Per-day rows plus a closing `total` row.
  std::string csv() const;
};

double gap_percent(double reward_sim, double reward_real);

struct TransferOptions {
  int days = 4;
  Seed seed{0};
};

// Evaluates `policy` greedily on both backends over consecutive days,
// carrying SoC over between days (the simulated run carries its own final
// SoC; hardware keeps whatever state it is in). A TransportError before the
// first hardware step propagates; later ones truncate the report.
TransferReport run_transfer(const Policy& policy, const env::ArbitrageEnvConfig& base,
                            const std::vector<TrainingDay>& days, env::Backend& ideal,
                            env::Backend& hardware, const TransferOptions& options);

// Writes summary.txt, transfer.csv, sim_steps.csv and real_steps.csv.
void save_transfer(const TransferReport& report, const std::filesystem::path& dir);

}  // namespace hlgym::control
