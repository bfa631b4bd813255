#include <doctest.h>

#include <chrono>

#include "properties.hpp"

TEST_CASE("structural invariants over seeded instances") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto tally = props::run_all(20240601, 1500);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(tally.total_trials() >= 10000);
  for (const auto& [name, n] : tally.trials) {
    CAPTURE(name);
    CHECK(n > 0);
    CHECK(tally.failures.count(name) == 0);
  }
  CHECK(secs <= 120.0);
}
