#pragma once

#include <cstdint>
#include <random>

namespace hlgym {

struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

// Deterministic pseudo-random stream. Two streams built from the same Seed
// yield identical draws on the same standard library.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed.value) {}

  // Independent stream derived from this seed and a label, so separate
  // consumers (noise, exploration, ...) do not perturb each other.
  static Rng derived(Seed seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed.value), static_cast<std::uint32_t>(seed.value >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    Rng rng(seed);
    rng.engine_.seed(seq);
    return rng;
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace hlgym
