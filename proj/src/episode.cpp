#include "hlgym/episode.hpp"

#include <string>

#include "hlgym/errors.hpp"

namespace hlgym {

void EpisodeRecord::append(EpisodeRow row) {
  const auto expected = static_cast<std::int64_t>(rows_.size());
  if (row.step != expected) {
    throw ArgumentError("episode row step " + std::to_string(row.step) + ", expected " +
                        std::to_string(expected));
  }
  if (row.step >= grid_.n_steps()) throw ArgumentError("episode row beyond grid horizon");
  if (!(row.soc >= 0.0 && row.soc <= 1.0)) throw ArgumentError("episode row soc outside [0,1]");
  rows_.push_back(std::move(row));
}

double EpisodeRecord::total_reward() const {
  double sum = 0.0;
  for (const auto& r : rows_) sum += r.reward_eur;
  return sum;
}

}  // namespace hlgym
