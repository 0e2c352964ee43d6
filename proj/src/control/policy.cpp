#include "hlgym/control/policy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "../csv.hpp"
#include "hlgym/errors.hpp"

namespace hlgym::control {

namespace {

constexpr const char* magic = "hlgym-policy 1";

std::size_t idle_of(const std::vector<double>& actions) {
  const auto it = std::find(actions.begin(), actions.end(), 0.0);
  if (it == actions.end()) throw ArgumentError("action set lacks the idle action 0 kW");
  return static_cast<std::size_t>(it - actions.begin());
}

}  // namespace

ThresholdPolicy::ThresholdPolicy(EnergyPrice buy_below, EnergyPrice sell_above, std::vector<double> actions)
    : buy_below_(buy_below.eur_per_mwh()), sell_above_(sell_above.eur_per_mwh()) {
  if (buy_below_ > sell_above_) throw ArgumentError("threshold policy: buy_below > sell_above");
  idle_ = idle_of(actions);
  charge_ = static_cast<std::size_t>(std::max_element(actions.begin(), actions.end()) - actions.begin());
  discharge_ = static_cast<std::size_t>(std::min_element(actions.begin(), actions.end()) - actions.begin());
}

std::size_t ThresholdPolicy::act(const env::StepResult& last) const {
  const double p = last.info.next_price_eur_mwh;
  if (p < buy_below_) return charge_;
  if (p > sell_above_) return discharge_;
  return idle_;
}

ThresholdPolicy threshold_policy(EnergyPrice buy_below, EnergyPrice sell_above, std::vector<double> actions) {
  return ThresholdPolicy(buy_below, sell_above, std::move(actions));
}

QPolicy::QPolicy(const QTable& table, PriceBins bins, std::vector<double> action_set_kw, std::string hash)
    : bins_(std::move(bins)), action_set_kw_(std::move(action_set_kw)), config_hash_(std::move(hash)) {
  if (action_set_kw_.size() != table.action_count()) throw ArgumentError("action set does not match the table");
  actions_.resize(QTable::state_count);
  for (std::size_t s = 0; s < QTable::state_count; ++s) actions_[s] = table.greedy(s);
}

std::size_t QPolicy::act(const env::StepResult& last) const {
  return actions_[QTable::index(state_features(last, bins_))];
}

std::string QPolicy::to_text() const {
  std::string out = std::string(magic) + "\n";
  out += "config_hash " + config_hash_ + "\n";
  out += "actions_kw";
  for (double a : action_set_kw_) out += " " + detail::format_exact(a);
  out += "\nprice_edges";
  for (double e : bins_.edges) out += " " + detail::format_exact(e);
  out += "\nstates " + std::to_string(QTable::state_count) + "\n";
  for (std::size_t s = 0; s < actions_.size(); ++s) {
    out += std::to_string(s) + " " + std::to_string(actions_[s]) + "\n";
  }
  return out;
}

QPolicy QPolicy::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(std::string("policy file ends before ") + what, line_no + 1);
    ++line_no;
    return detail::split(detail::trim(line), ' ');
  };
  auto numbers = [&](const std::vector<std::string_view>& f) {
    std::vector<double> v;
    for (std::size_t i = 1; i < f.size(); ++i) v.push_back(detail::parse_double(f[i], line_no));
    return v;
  };

  if (!std::getline(in, line) || detail::trim(line) != magic) throw ParseError("not an hlgym policy file", 1);
  ++line_no;
  QPolicy p;
  auto f = next("config_hash");
  if (f.size() != 2 || f[0] != "config_hash") throw ParseError("expected config_hash", line_no);
  p.config_hash_ = std::string(f[1]);
  f = next("actions_kw");
  if (f.empty() || f[0] != "actions_kw") throw ParseError("expected actions_kw", line_no);
  p.action_set_kw_ = numbers(f);
  try {
    idle_of(p.action_set_kw_);
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), line_no);
  }
  f = next("price_edges");
  if (f.empty() || f[0] != "price_edges") throw ParseError("expected price_edges", line_no);
  p.bins_.edges = numbers(f);
  if (p.bins_.edges.size() != QTable::price_bins - 1 || !std::is_sorted(p.bins_.edges.begin(), p.bins_.edges.end())) {
    throw ParseError("price_edges must be 9 ascending values", line_no);
  }
  f = next("states");
  if (f.size() != 2 || f[0] != "states" || f[1] != std::to_string(QTable::state_count)) {
    throw ParseError("expected states " + std::to_string(QTable::state_count), line_no);
  }
  p.actions_.resize(QTable::state_count);
  for (std::size_t s = 0; s < QTable::state_count; ++s) {
    f = next("all state rows");
    std::size_t idx = 0, act = 0;
    try {
      if (f.size() != 2) throw std::invalid_argument("fields");
      idx = std::stoul(std::string(f[0]));
      act = std::stoul(std::string(f[1]));
    } catch (const std::exception&) {
      throw ParseError("expected '<state> <action>'", line_no);
    }
    if (idx != s) throw ParseError("state rows out of order", line_no);
    if (act >= p.action_set_kw_.size()) throw ParseError("action index out of range", line_no);
    p.actions_[s] = act;
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) throw ParseError("trailing content", line_no);
  }
  return p;
}

void QPolicy::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << to_text();
  if (!out) throw LoggingError("cannot write policy " + path.string());
}

QPolicy QPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("policy file " + path.string() + " not found");
  std::stringstream s;
  s << in.rdbuf();
  return parse(s.str());
}

EpisodeRecord evaluate(const Policy& policy, env::ArbitrageEnv& env, Seed seed) {
  auto last = env.reset(seed);
  while (!last.terminated) last = env.step(policy.act(last));
  return env.record();
}

}  // namespace hlgym::control
