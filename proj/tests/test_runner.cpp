#include <doctest.h>

#include <json.hpp>

#include "error.hpp"
#include "runner.hpp"
#include "support.hpp"

using namespace gridbench;
using namespace gbtest;

namespace {

std::shared_ptr<const DistrictDataset> bundled() {
  static const auto d = std::make_shared<const DistrictDataset>(load_district(bundled_data()));
  return d;
}

std::vector<RunConfig> quick_matrix() {
  std::vector<RunConfig> configs;
  for (const auto& id : table_presets()) {
    auto c = preset_config(id);
    c.epochs = 2;
    c.seed = 11;
    configs.push_back(c);
  }
  return configs;
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("preset ids round trip") {
  for (const auto& id : table_presets()) CHECK(preset_config(id).id() == id);
  CHECK(table_presets().size() == 17);
}

TEST_CASE("presets map onto devices, rewards and agents") {
  auto c = preset_config("rbc-b1-c-dhw_bess_pv");
  CHECK(c.agent.kind == AgentKind::kRbc);
  CHECK(c.env.reward.kind == RewardKind::kCost);
  REQUIRE(c.env.buildings.size() == 1);
  CHECK(c.env.buildings[0].pv);
  CHECK(c.env.buildings[0].battery);
  CHECK(c.env.buildings[0].dhw_storage);
  CHECK_FALSE(c.env.buildings[0].heat_pump_control);
  CHECK(rbc_kind_for(c) == RbcKind::kCost);

  c = preset_config("rlc-b1-d_o-hp");
  CHECK(c.agent.kind == AgentKind::kQLearning);
  CHECK(c.env.reward.kind == RewardKind::kDiscomfortConsumption);
  CHECK(c.env.reward.m == 3.0);
  CHECK(c.env.buildings[0].heat_pump_control);

  c = preset_config("rlc-b1_b2-p-bess_pv");
  CHECK(c.env.reward.kind == RewardKind::kAvgDailyPeak);
  CHECK(c.building_ids == std::vector<std::string>{"b1", "b2"});

  c = preset_config("x-b1_b2-x-pv");
  CHECK(c.baseline());
  CHECK(c.agent.kind == AgentKind::kNone);
  CHECK(action_slots(c.env).empty());
}

TEST_CASE("invalid presets") {
  for (const char* bad :
       {"rbc-b1-c", "foo-b1-c-dhw", "rbc-b1-q-dhw", "rbc-b1-c-wind", "x-b1-c-x", "rbc-b1-c-x",
        "rlc-b1-c-hp", "rlc-b1-d_o-dhw", "rbc-b1-d_o-hp", "rbc-b1_b1-c-dhw", "rbc-b-1-c-dhw",
        "rbc--c-dhw"}) {
    CHECK_MESSAGE(error_code_of([&] { preset_config(bad); }) == ErrorCode::kInvalidArgument, bad);
  }
}

TEST_CASE("agent overrides") {
  auto c = preset_config("rlc-b1-c-dhw");
  apply_agent_override(c, "random");
  CHECK(c.agent.kind == AgentKind::kRandom);
  apply_agent_override(c, "external::9000");
  CHECK(c.agent.kind == AgentKind::kExternal);
  CHECK(c.agent.address == ":9000");
  CHECK(error_code_of([&] { apply_agent_override(c, "external:nope"); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(error_code_of([&] { apply_agent_override(c, "ppo"); }) == ErrorCode::kInvalidArgument);

  auto hp = preset_config("rlc-b1-d_o-hp");
  CHECK(error_code_of([&] { apply_agent_override(hp, "rbc"); }) == ErrorCode::kInvalidArgument);
  auto base = preset_config("x-b1_b2-x-x");
  CHECK(error_code_of([&] { apply_agent_override(base, "qlearn"); }) ==
        ErrorCode::kInvalidArgument);
  CHECK_NOTHROW(apply_agent_override(base, "none"));
}

TEST_CASE("validation against a dataset") {
  const auto d = bundled();
  CHECK(error_code_of([&] { validate(preset_config("rbc-b9-c-dhw"), *d); }) ==
        ErrorCode::kValidation);
  auto c = preset_config("rbc-b1-c-dhw");
  c.split = SplitSpec{20, 20};
  CHECK(error_code_of([&] { validate(c, *d); }) != static_cast<ErrorCode>(0));
  CHECK_NOTHROW(validate(preset_config("rbc-b1-c-dhw"), *d));
}

TEST_CASE("a run reports the test range against both baselines") {
  const auto d = bundled();
  auto c = preset_config("rbc-b1-c-bess_pv");
  const auto r = run(c, d);
  CHECK(r.agent_name == "cost-rbc");
  CHECK(r.report.range == d->ranges().test);
  CHECK(r.trace.size() == d->ranges().test.size());
  CHECK(r.test_rewards.size() == r.trace.size());
  REQUIRE(r.report.comparisons.size() == 2);
  CHECK(r.report.comparisons[0].baseline == "x-b1_b2-x-x");
  CHECK(r.report.comparisons[1].baseline == "x-b1_b2-x-pv");
  // Single-building run versus the two-building baselines: no district row.
  CHECK_FALSE(r.report.comparisons[0].district.has_value());
  REQUIRE(r.report.comparisons[0].buildings.size() == 1);
  CHECK(r.report.comparisons[0].buildings[0].cost.has_value());
  CHECK(r.epochs_used == 0);

  const auto j = nlohmann::json::parse(run_json(r));
  CHECK(j["config_id"] == "rbc-b1-c-bess_pv");
  CHECK(j["agent"] == "cost-rbc");
  CHECK(j["observations"].size() == 6);
  CHECK(j.contains("report"));
}

TEST_CASE("the pv baseline compared with itself is all zeros") {
  const auto r = run(preset_config("x-b1_b2-x-pv"), bundled());
  REQUIRE(r.report.comparisons.size() == 2);
  const auto& self = r.report.comparisons[1];
  REQUIRE(self.district.has_value());
  CHECK(*self.district->cost == 0.0);
  CHECK(*self.district->avg_daily_peak == 0.0);
}

TEST_CASE("matrix order and parallel determinism") {
  const auto configs = quick_matrix();
  const auto serial = run_matrix(configs, bundled(), 1);
  const auto parallel = run_matrix(configs, bundled(), 4);
  REQUIRE(serial.size() == configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    CHECK(serial[i].config_id == table_presets()[i]);
    CHECK(parallel[i].config_id == table_presets()[i]);
    CHECK_MESSAGE(serial[i].error.empty(), serial[i].error);
    REQUIRE(serial[i].result.has_value());
    REQUIRE(parallel[i].result.has_value());
    CHECK(run_json(*serial[i].result) == run_json(*parallel[i].result));
  }
  CHECK(serial[0].baseline);
  CHECK_FALSE(serial[2].baseline);
  CHECK(matrix_json(serial) == matrix_json(parallel));
  CHECK(matrix_text(serial).find("rlc-b1_b2-p-bess_pv") != std::string::npos);
}

TEST_CASE("a failing preset becomes an error entry") {
  auto configs = quick_matrix();
  configs.resize(3);
  configs[1] = preset_config("rbc-b7-c-dhw");
  const auto entries = run_matrix(configs, bundled(), 2);
  CHECK(entries[0].result.has_value());
  CHECK_FALSE(entries[1].result.has_value());
  CHECK(entries[1].error.find("b7") != std::string::npos);
  CHECK(entries[2].result.has_value());
  const auto j = nlohmann::json::parse(matrix_json(entries));
  CHECK(j["runs"][1]["status"] == "error");
  CHECK(matrix_text(entries).find("ERROR") != std::string::npos);
}

TEST_CASE("seeds and epochs") {
  auto c = preset_config("rlc-b1-c-bess_pv");
  c.epochs = 2;
  c.seed = 1;
  const auto a = run(c, bundled());
  const auto b = run(c, bundled());
  CHECK(run_json(a) == run_json(b));
  CHECK(a.epochs_used == 2);
  c.seed = 2;
  CHECK(run_json(run(c, bundled())) != run_json(a));
}

TEST_CASE("output files") {
  TempDir dir;
  const auto r = run(preset_config("rbc-b1-e-dhw"), bundled());
  write_run_outputs(r, *bundled(), dir / "run");
  for (const char* f : {"kpis.json", "kpis.txt", "trace.csv", "daily_peaks.csv"}) {
    CHECK(std::filesystem::exists(dir / "run" / f));
  }
  CHECK(read_file(dir / "run" / "kpis.json") == run_json(r));
  const auto peaks = read_file(dir / "run" / "daily_peaks.csv");
  CHECK(std::count(peaks.begin(), peaks.end(), '\n') == 1 + 17);
}

TEST_CASE("m sweep") {
  auto c = preset_config("rlc-b1-d_o-hp");
  c.epochs = 1;
  const auto rows = m_sweep(c, {1.0, 3.0, 0.5}, bundled(), 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].error.empty());
  CHECK(*rows[0].discomfort_delta == 0.0);
  CHECK(rows[1].error.empty());
  CHECK(rows[1].consumption_delta.has_value());
  CHECK(rows[2].error.find("m must be >= 1") != std::string::npos);
  CHECK(rows[0].deviation.over_cool_steps + rows[0].deviation.under_cool_steps <=
        bundled()->ranges().test.size());
  const auto j = nlohmann::json::parse(m_sweep_json(rows));
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][2].contains("error"));
  CHECK(m_sweep_text(rows).find("ERROR") != std::string::npos);

  CHECK(error_code_of([&] { m_sweep(preset_config("rlc-b1-c-dhw"), {1.0}, bundled(), 1); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("dataset summary") {
  const auto j = nlohmann::json::parse(dataset_summary_json(*bundled()));
  CHECK(j["steps"] == 720);
  CHECK(j["train"]["end"] == 312);
  CHECK(j["buildings"].size() == 2);
  CHECK(j["buildings"][0]["battery_kwh"] == 4.0);
}

}  // TEST_SUITE
