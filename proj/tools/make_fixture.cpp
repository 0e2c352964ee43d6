// Writes the synthetic BELPEX-like hourly price year used as the training fixture.

#include <iostream>

#include <CLI11.hpp>

#include "hlgym/prices.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic year of hourly day-ahead prices"};
  int year = 2023;
  std::uint64_t seed = 2023;
  std::string out = "data/belpex_2023_synthetic.csv";
  app.add_option("--year", year, "calendar year");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--out", out, "output CSV");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto series = hlgym::synthetic_belpex_year(year, hlgym::Seed{seed});
    hlgym::save_fixture(series, out);
    std::cout << "wrote " << series.size() << " hours to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
  return 0;
}
