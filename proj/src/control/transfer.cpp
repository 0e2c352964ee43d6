#include "hlgym/control/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "hlgym/errors.hpp"
#include "hlgym/telemetry.hpp"

namespace hlgym::control {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Runs one day; returns false when the backend failed part-way.
bool run_day(const Policy& policy, env::ArbitrageEnv& env, Seed seed, std::vector<EpisodeRecord>& out) {
  try {
    auto last = env.reset(seed);
    while (!last.terminated) last = env.step(policy.act(last));
    out.push_back(env.record());
    return true;
  } catch (const TransportError&) {
    out.push_back(env.record());
    throw;
  }
}

std::string steps_csv(const std::vector<EpisodeRecord>& records) {
  std::string out = std::string(telemetry::csv_header) + "\n";
  std::int64_t offset = 0;
  for (const auto& rec : records) {
    for (const auto& r : rec.rows()) {
      telemetry::StepLogRow row;
      row.step = offset + r.step;
      row.timestamp = rec.grid().timestamp_of(r.step);
      row.soc = r.soc;
      row.price_eur_mwh = r.price.eur_per_mwh();
      row.action = static_cast<std::int64_t>(r.action);
      row.setpoint_kw = r.setpoint.kw();
      row.delivered_kw = r.delivered.kw();
      row.temp_c = r.temp_c;
      row.reward_eur = r.reward_eur;
      out += telemetry::format_csv_row(row) + "\n";
    }
    offset += rec.grid().n_steps();
  }
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw LoggingError("cannot write " + p.string());
}

}  // namespace

double gap_percent(double sim, double real) {
  if (sim == real) return 0.0;
  if (sim == 0.0) return real < 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  return 100.0 * (sim - real) / std::abs(sim);
}

TransferReport run_transfer(const Policy& policy, const env::ArbitrageEnvConfig& base,
                            const std::vector<TrainingDay>& days, env::Backend& ideal, env::Backend& hardware,
                            const TransferOptions& o) {
  if (o.days < 1) throw ArgumentError("transfer needs at least one day");
  if (days.size() < static_cast<std::size_t>(o.days)) {
    throw ArgumentError("transfer needs " + std::to_string(o.days) + " days of prices, have " +
                        std::to_string(days.size()));
  }
  TransferReport rep;
  rep.sim_backend = ideal.kind();
  rep.real_backend = hardware.kind();

  auto day_config = [&](int d, double soc) {
    env::ArbitrageEnvConfig cfg = base;
    cfg.grid = days[static_cast<std::size_t>(d)].grid;
    cfg.prices = days[static_cast<std::size_t>(d)].prices;
    cfg.initial_soc = soc;
    return cfg;
  };
  auto day_seed = [&](int d) { return Seed{o.seed.value + static_cast<std::uint64_t>(d)}; };

  double soc = base.initial_soc;
  for (int d = 0; d < o.days; ++d) {
    env::ArbitrageEnv env(day_config(d, soc), ideal);
    run_day(policy, env, day_seed(d), rep.sim_records);
    soc = rep.sim_records.back().rows().back().soc;
  }

  soc = base.initial_soc;
  for (int d = 0; d < o.days; ++d) {
    env::ArbitrageEnv env(day_config(d, soc), hardware);
    try {
      run_day(policy, env, day_seed(d), rep.real_records);
    } catch (const TransportError& e) {
      const bool any = std::any_of(rep.real_records.begin(), rep.real_records.end(),
                                   [](const EpisodeRecord& r) { return !r.rows().empty(); });
      if (!any) throw;
      rep.truncated = true;
      rep.error = e.what();
      break;
    }
    soc = rep.real_records.back().rows().back().soc;
  }

  for (int d = 0; d < o.days; ++d) {
    DayResult day;
    day.day = days[static_cast<std::size_t>(d)].grid.start();
    const auto& sim = rep.sim_records[static_cast<std::size_t>(d)];
    day.reward_sim = sim.total_reward();
    day.steps_sim = static_cast<std::int64_t>(sim.rows().size());
    if (static_cast<std::size_t>(d) < rep.real_records.size()) {
      const auto& real = rep.real_records[static_cast<std::size_t>(d)];
      day.reward_real = real.total_reward();
      day.steps_real = static_cast<std::int64_t>(real.rows().size());
    }
    rep.reward_sim += day.reward_sim;
    rep.reward_real += day.reward_real;
    rep.days.push_back(day);
  }
  rep.gap_percent = gap_percent(rep.reward_sim, rep.reward_real);
  return rep;
}

std::string TransferReport::summary() const {
  std::string s;
  s += "sim backend:   " + sim_backend + "\n";
  s += "real backend:  " + real_backend + "\n";
  for (const auto& d : days) {
    s += "  " + format_date(d.day) + "  sim " + fmt("%9.4f", d.reward_sim) + " EUR  real " +
         fmt("%9.4f", d.reward_real) + " EUR  gap " + fmt("%7.3f", control::gap_percent(d.reward_sim, d.reward_real)) +
         " %" + (d.steps_real < d.steps_sim ? "  (partial)" : "") + "\n";
  }
  s += "reward sim:    " + fmt("%.6f", reward_sim) + " EUR\n";
  s += "reward real:   " + fmt("%.6f", reward_real) + " EUR\n";
  s += "gap:           " + fmt("%.3f", gap_percent) + " %\n";
  if (truncated) s += "TRUNCATED: " + error + "\n";
  return s;
}

std::string TransferReport::csv() const {
  std::string s = "day,reward_sim_eur,reward_real_eur,gap_percent,steps_sim,steps_real\n";
  auto g = [](double v) { return fmt("%.17g", v); };
  for (const auto& d : days) {
    s += format_date(d.day) + "," + g(d.reward_sim) + "," + g(d.reward_real) + "," +
         g(control::gap_percent(d.reward_sim, d.reward_real)) + "," + std::to_string(d.steps_sim) + "," +
         std::to_string(d.steps_real) + "\n";
  }
  std::int64_t ss = 0, sr = 0;
  for (const auto& d : days) {
    ss += d.steps_sim;
    sr += d.steps_real;
  }
  s += "total," + g(reward_sim) + "," + g(reward_real) + "," + g(gap_percent) + "," + std::to_string(ss) + "," +
       std::to_string(sr) + "\n";
  return s;
}

void save_transfer(const TransferReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.txt", rep.summary());
  write_file(dir / "transfer.csv", rep.csv());
  write_file(dir / "sim_steps.csv", steps_csv(rep.sim_records));
  write_file(dir / "real_steps.csv", steps_csv(rep.real_records));
}

}  // namespace hlgym::control
