#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>

#include "error.hpp"
#include "evaluation.hpp"
#include "support.hpp"

using namespace gridbench;
using namespace gbtest;

namespace {

// Straight loops over the trace, no shared code with the library.
DistrictKpis oracle(const EpisodeTrace& tr) {
  DistrictKpis k;
  for (std::size_t b = 0; b < tr.buildings.size(); ++b) {
    for (const auto& r : tr.buildings[b]) {
      const double pos = r.net_electricity > 0.0 ? r.net_electricity : 0.0;
      k.cost += pos * r.rate;
      k.emissions += pos * r.carbon;
      k.discomfort += std::fabs(r.indoor_temp - r.setpoint);
      k.consumption += pos;
      k.unserved_energy += r.unserved_electric;
    }
  }
  double peaks = 0.0;
  for (std::size_t d = 0; d < tr.size() / tr.steps_per_day; ++d) {
    double m = -1e300;
    for (std::size_t t = 0; t < tr.steps_per_day; ++t) {
      m = std::max(m, tr.district_power[d * tr.steps_per_day + t]);
    }
    peaks += m;
  }
  k.avg_daily_peak = peaks * tr.steps_per_day / tr.size();
  return k;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("cost counts imports only") {
  const std::vector<double> e{1.0, -2.0, 3.0}, r{0.1, 0.1, 0.2};
  CHECK(cost_kpi(e, r) == doctest::Approx(0.7).epsilon(1e-15));
  const std::vector<double> neg{-1.0, -2.0, -0.5};
  CHECK(cost_kpi(neg, r) == 0.0);
  CHECK(consumption_kpi(e) == doctest::Approx(4.0));
  CHECK(emissions_kpi(e, std::vector<double>{0.5, 0.5, 0.5}) == doctest::Approx(2.0));
  CHECK(error_code_of([&] { cost_kpi(e, std::vector<double>{0.1}); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("discomfort is absolute deviation") {
  const std::vector<double> t{21.0, 25.0, 23.0}, spt{23.0, 23.0, 23.0};
  CHECK(discomfort_kpi(t, spt) == doctest::Approx(4.0));
}

TEST_CASE("average daily peak") {
  std::vector<double> p(48, 1.0);
  p[10] = 5.0;
  p[30] = 3.0;
  CHECK(avg_daily_peak_kpi(p, 24) == doctest::Approx(4.0));
  CHECK(daily_peaks(p, 24) == std::vector<double>{5.0, 3.0});
  p.pop_back();
  CHECK(error_code_of([&] { avg_daily_peak_kpi(p, 24); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([&] { daily_peaks(std::vector<double>{}, 24); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("rewards") {
  StepState s;
  s.net_electricity = 2.0;
  s.rate = 0.0587;
  CHECK(reward({RewardKind::kCost, 1.0}, s) == doctest::Approx(-0.1174).epsilon(1e-15));
  s.net_electricity = -1.0;
  CHECK(reward({RewardKind::kCost, 1.0}, s) == 0.0);

  s.net_electricity = 2.0;
  s.carbon = 0.5;
  CHECK(reward({RewardKind::kEmissions, 1.0}, s) == doctest::Approx(-1.0));

  s.setpoint = 23.0;
  s.indoor_temp = 21.0;
  CHECK(reward({RewardKind::kDiscomfortConsumption, 3.0}, s) == doctest::Approx(-6.0));
  s.indoor_temp = 25.0;
  CHECK(reward({RewardKind::kDiscomfortConsumption, 3.0}, s) == doctest::Approx(-2.0));
  s.indoor_temp = 23.0;
  CHECK(reward({RewardKind::kDiscomfortConsumption, 3.0}, s) == 0.0);

  s.district_power = 0.0;
  CHECK(reward({RewardKind::kAvgDailyPeak, 1.0}, s) == 0.0);
  s.district_power = 7.5;
  CHECK(reward({RewardKind::kAvgDailyPeak, 1.0}, s) == -7.5);
}

TEST_CASE("rewards need their symbols") {
  StepState s;
  s.net_electricity = 1.0;
  CHECK(error_code_of([&] { reward({RewardKind::kCost, 1.0}, s); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(error_code_of([&] { reward({RewardKind::kEmissions, 1.0}, s); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(error_code_of([&] { reward({RewardKind::kAvgDailyPeak, 1.0}, s); }) ==
        ErrorCode::kInvalidArgument);
  s.indoor_temp = 20.0;
  CHECK(error_code_of([&] { reward({RewardKind::kDiscomfortConsumption, 1.0}, s); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("multiplier validation") {
  CHECK(error_code_of([] { validate(RewardSpec{RewardKind::kDiscomfortConsumption, 0.5}); }) ==
        ErrorCode::kValidation);
  CHECK(error_code_of([] { validate(RewardSpec{RewardKind::kDiscomfortConsumption, NAN}); }) ==
        ErrorCode::kValidation);
  CHECK_NOTHROW(validate(RewardSpec{RewardKind::kDiscomfortConsumption, 1.0}));
  CHECK_NOTHROW(validate(RewardSpec{RewardKind::kCost, 0.0}));
}

TEST_CASE("over-cooling penalty grows with m") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> temp(18.0, 30.0);
  for (int i = 0; i < 500; ++i) {
    StepState s;
    s.indoor_temp = temp(rng);
    s.setpoint = 24.0;
    double prev = reward({RewardKind::kDiscomfortConsumption, 1.0}, s);
    for (double m = 1.5; m <= 6.0; m += 0.5) {
      const double r = reward({RewardKind::kDiscomfortConsumption, m}, s);
      CHECK(r <= prev);
      prev = r;
    }
  }
}

TEST_CASE("trace kpis match direct sums") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto tr = random_trace(rng, 24 * 5, 3);
    const auto want = oracle(tr);
    const auto rep_ = compute_report("x", tr);
    CHECK(rep_.district.cost == doctest::Approx(want.cost).epsilon(1e-12));
    CHECK(rep_.district.emissions == doctest::Approx(want.emissions).epsilon(1e-12));
    CHECK(rep_.district.discomfort == doctest::Approx(want.discomfort).epsilon(1e-12));
    CHECK(rep_.district.consumption == doctest::Approx(want.consumption).epsilon(1e-12));
    CHECK(rep_.district.avg_daily_peak == doctest::Approx(want.avg_daily_peak).epsilon(1e-12));
    CHECK(rep_.district.unserved_energy == doctest::Approx(want.unserved_energy).epsilon(1e-12));
    CHECK(rep_.daily_peaks.size() == 5);
    double sum = 0.0;
    for (const auto& b : rep_.buildings) sum += b.cost;
    CHECK(sum == doctest::Approx(rep_.district.cost).epsilon(1e-12));
  }
}

TEST_CASE("kpi on a sub-range and per building") {
  std::mt19937_64 rng(4);
  const auto tr = random_trace(rng, 72, 2);
  const double whole = kpi(Objective::kConsumption, tr, {0, 72});
  const double parts = kpi(Objective::kConsumption, tr, {0, 24}) +
                       kpi(Objective::kConsumption, tr, {24, 72});
  CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
  CHECK(kpi(Objective::kCost, tr, {0, 72}, 0) + kpi(Objective::kCost, tr, {0, 72}, 1) ==
        doctest::Approx(kpi(Objective::kCost, tr, {0, 72})).epsilon(1e-12));
  CHECK(error_code_of([&] { kpi(Objective::kCost, tr, {0, 73}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(error_code_of([&] { kpi(Objective::kCost, tr, {0, 72}, 2); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(error_code_of([&] { kpi(Objective::kAvgDailyPeak, tr, {0, 30}); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("percent deltas") {
  CHECK(*percent_delta(8.0, 10.0) == doctest::Approx(-20.0));
  CHECK(*percent_delta(10.0, 10.0) == 0.0);
  CHECK(*percent_delta(12.0, 10.0) == doctest::Approx(20.0));
  CHECK_FALSE(percent_delta(1.0, 0.0).has_value());
}

TEST_CASE("comparisons") {
  std::mt19937_64 rng(2);
  auto tr = random_trace(rng, 48, 2);
  const auto base = compute_report("base", tr);
  for (auto& b : tr.buildings) {
    for (auto& r : b) r.net_electricity *= 0.8;
  }
  for (auto& p : tr.district_power) p *= 0.8;
  const auto run = compute_report("run", tr);
  const auto c = compare(run, base);
  CHECK(c.baseline == "base");
  REQUIRE(c.buildings.size() == 2);
  CHECK(*c.buildings[0].cost == doctest::Approx(-20.0).epsilon(1e-9));
  CHECK(*c.buildings[1].consumption == doctest::Approx(-20.0).epsilon(1e-9));
  REQUIRE(c.district.has_value());
  CHECK(*c.district->emissions == doctest::Approx(-20.0).epsilon(1e-9));
  CHECK(*c.district->avg_daily_peak == doctest::Approx(-20.0).epsilon(1e-9));

  std::mt19937_64 rng2(2);
  auto shifted = random_trace(rng2, 48, 2);
  for (auto& s : shifted.steps) s += 24;
  CHECK(error_code_of([&] { compare(compute_report("s", shifted), base); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("comparison with a different building set has no district row") {
  std::mt19937_64 rng(2);
  const auto two = random_trace(rng, 24, 2);
  auto one = two;
  one.building_ids.resize(1);
  one.buildings.resize(1);
  const auto c = compare(compute_report("one", one), compute_report("two", two));
  CHECK(c.buildings.size() == 1);
  CHECK_FALSE(c.district.has_value());
}

TEST_CASE("fixed charges stay out unless enabled") {
  std::mt19937_64 rng(8);
  const auto tr = random_trace(rng, 72, 2);
  const auto plain = compute_report("p", tr);
  const auto with = compute_report("f", tr, TariffOptions{true, 0.5});
  CHECK(with.district.cost == doctest::Approx(plain.district.cost + 2 * 3 * 0.5));
  CHECK(compute_report("f", tr, TariffOptions{false, 0.5}).district.cost == plain.district.cost);
}

TEST_CASE("temperature deviation by side") {
  EpisodeTrace tr;
  tr.building_ids = {"b1"};
  tr.buildings.resize(1);
  const std::vector<double> temps{22.0, 20.0, 25.0, 24.0, 27.0};
  for (std::size_t t = 0; t < temps.size(); ++t) {
    BuildingStepRecord r;
    r.indoor_temp = temps[t];
    r.setpoint = 24.0;
    tr.buildings[0].push_back(r);
    tr.steps.push_back(t);
  }
  const auto d = temperature_deviation(tr, 0);
  CHECK(d.over_cool_steps == 2);
  CHECK(d.over_cool_mean == doctest::Approx(3.0));
  CHECK(d.over_cool_std == doctest::Approx(1.0));
  CHECK(d.under_cool_steps == 2);
  CHECK(d.under_cool_mean == doctest::Approx(2.0));
  CHECK(d.under_cool_std == doctest::Approx(1.0));
}

TEST_CASE("report renderings") {
  std::mt19937_64 rng(1);
  const auto tr = random_trace(rng, 48, 2);
  auto report = compute_report("demo", tr);
  report.comparisons.push_back(compare(report, report));
  const auto j = nlohmann::json::parse(report_json(report));
  CHECK(j["label"] == "demo");
  CHECK(j["buildings"].size() == 2);
  CHECK(j["district"]["cost"].get<double>() == doctest::Approx(report.district.cost));
  CHECK(j["daily_peaks"].size() == 2);
  CHECK(j["comparisons"][0]["district"]["cost_pct"].get<double>() == 0.0);

  const auto text = report_text(report);
  CHECK(text.find("demo") != std::string::npos);
  CHECK(text.find("avg daily peak") != std::string::npos);
  CHECK(text.find("vs demo") != std::string::npos);

  TimeAxis axis;
  axis.start = make_local_time(2018, 6, 1);
  const auto csv = daily_peaks_csv(report, axis, 24);
  CHECK(csv.rfind("day,date,peak_kw\n0,2018-06-01,", 0) == 0);
  CHECK(csv.find("\n1,2018-06-02,") != std::string::npos);
}

}  // TEST_SUITE
