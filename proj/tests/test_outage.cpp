#include <doctest.h>

#include <cmath>
#include <numeric>

#include "error.hpp"
#include "outage.hpp"
#include "support.hpp"

using namespace gridbench;
using namespace gbtest;

TEST_SUITE("outage") {

TEST_CASE("zero saifi never interrupts") {
  const auto s = generate_outages({0.0, 2.0, 1}, 365, 24);
  CHECK(s.size() == 365 * 24);
  CHECK(s.outage_steps() == 0);
  CHECK(s.events.empty());
  CHECK(s.stochastic);
}

TEST_CASE("saifi of 365 starts an outage every day") {
  const auto s = generate_outages({365.0, 1.0, 3}, 60, 24);
  REQUIRE(s.events.size() == 60);
  for (std::size_t d = 0; d < 60; ++d) {
    CHECK(s.events[d].start_step / 24 == d);
    CHECK(s.at(s.events[d].start_step));
  }
  CHECK(daily_outage_probability(800.0) == 1.0);
}

TEST_CASE("daily probability is saifi over 365") {
  CHECK(daily_outage_probability(1.0) == doctest::Approx(1.0 / 365.0).epsilon(1e-15));
  CHECK(daily_outage_probability(1.0) == doctest::Approx(0.0027397).epsilon(1e-4));
  CHECK(daily_outage_probability(0.0) == 0.0);
}

TEST_CASE("event bookkeeping") {
  const auto s = generate_outages({40.0, 3.0, 17}, 365, 24);
  std::vector<std::uint8_t> rebuilt(s.size(), 0);
  for (const auto& e : s.events) {
    CHECK(e.duration_steps >= 1);
    CHECK(static_cast<double>(e.duration_steps) >= e.duration_hours);
    CHECK(static_cast<double>(e.duration_steps) < e.duration_hours + 1.0);
    for (std::size_t k = e.start_step; k < std::min(s.size(), e.start_step + e.duration_steps); ++k) {
      rebuilt[k] = 1;
    }
  }
  CHECK(rebuilt == s.grid_down);
}

TEST_CASE("events are cut at the horizon and may cross midnight") {
  bool crossed = false;
  for (std::uint64_t seed = 0; seed < 50 && !crossed; ++seed) {
    const auto s = generate_outages({365.0, 30.0, seed}, 3, 24);
    CHECK(s.size() == 72);
    for (const auto& e : s.events) {
      if (e.start_step % 24 + e.duration_steps > 24) crossed = true;
    }
  }
  CHECK(crossed);
}

TEST_CASE("sub-hourly steps convert durations by step length") {
  const auto s = generate_outages({365.0, 2.0, 5}, 10, 96);
  for (const auto& e : s.events) {
    CHECK(e.duration_steps == std::max<std::size_t>(1, static_cast<std::size_t>(
                                                           std::ceil(e.duration_hours * 4.0))));
  }
}

TEST_CASE("same seed same signal, different seeds differ") {
  const ReliabilityParams p{12.0, 2.0, 77};
  CHECK(generate_outages(p, 365, 24).grid_down == generate_outages(p, 365, 24).grid_down);
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = generate_outages({12.0, 2.0, s}, 365, 24);
    const auto b = generate_outages({12.0, 2.0, s + 1000}, 365, 24);
    differing += a.grid_down != b.grid_down ? 1 : 0;
  }
  CHECK(differing == 20);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(generate_outages({-1.0, 2.0, 0}, 10, 24), Error);
  CHECK_THROWS_AS(generate_outages({1.0, 0.0, 0}, 10, 24), Error);
  CHECK_THROWS_AS(generate_outages({1.0, 2.0, 0}, 0, 24), Error);
  CHECK_THROWS_AS(generate_outages({1.0, 2.0, 0}, 10, 0), Error);
}

TEST_CASE("static series are wrapped verbatim") {
  std::vector<std::uint8_t> none(48, 0);
  CHECK(outage_from_series(none, 48).outage_steps() == 0);

  std::vector<std::uint8_t> one(48, 0);
  one[17] = 1;
  const auto s = outage_from_series(one, 48);
  CHECK(s.at(17));
  CHECK(s.outage_steps() == 1);
  CHECK_FALSE(s.stochastic);

  CHECK(error_code_of([&] { outage_from_series(one, 47); }) == ErrorCode::kValidation);
}

TEST_CASE("outage csv round trip") {
  TempDir dir;
  const auto s = generate_outages({50.0, 4.0, 8}, 30, 24);
  write_outage_csv(dir / "o.csv", s);
  CHECK(read_outage_csv(dir / "o.csv") == s.grid_down);

  write_file(dir / "b.csv", "outage\ntrue\nFalse\n1\n");
  CHECK(read_outage_csv(dir / "b.csv") == std::vector<std::uint8_t>{1, 0, 1});
  write_file(dir / "bad.csv", "outage\nmaybe\n");
  CHECK_THROWS_WITH(read_outage_csv(dir / "bad.csv"), doctest::Contains("bad.csv:2"));
}

}  // TEST_SUITE
