#pragma once

#include <cmath>
#include <compare>

#include "hlgym/errors.hpp"

namespace hlgym {

// Electrical power in kW. Grid-import positive: charging a battery or
// consuming load is > 0, PV injection or battery discharge is < 0.
class PowerKW {
 public:
  static constexpr double kSanityBound = 1000.0;

  constexpr PowerKW() = default;
  explicit PowerKW(double kw) : kw_(kw) {
    if (!std::isfinite(kw) || std::abs(kw) > kSanityBound) {
      throw ArgumentError("power out of range: " + std::to_string(kw) + " kW");
    }
  }

  constexpr double kw() const noexcept { return kw_; }

  friend constexpr auto operator<=>(const PowerKW&, const PowerKW&) = default;

 private:
  double kw_ = 0.0;
};

// Day-ahead price in EUR/MWh. May be negative.
class EnergyPrice {
 public:
  constexpr EnergyPrice() = default;
  explicit EnergyPrice(double eur_per_mwh) : value_(eur_per_mwh) {
    if (!std::isfinite(eur_per_mwh)) {
      throw ArgumentError("price is not finite");
    }
  }

  constexpr double eur_per_mwh() const noexcept { return value_; }

  friend constexpr auto operator<=>(const EnergyPrice&, const EnergyPrice&) = default;

 private:
  double value_ = 0.0;
};

}  // namespace hlgym
