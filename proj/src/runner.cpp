#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "trace.hpp"

namespace gridbench {

namespace {

using Json = nlohmann::ordered_json;

const std::vector<std::string> kAlgos = {"x", "rbc", "rlc"};
const std::vector<std::string> kObjectives = {"x", "c", "e", "d_o", "p"};
const std::vector<std::string> kDevices = {"x", "pv", "dhw", "bess_pv", "dhw_bess_pv", "hp"};

bool one_of(const std::vector<std::string>& options, const std::string& value) {
  return std::find(options.begin(), options.end(), value) != options.end();
}

[[noreturn]] void preset_error(std::string_view id, const std::string& what) {
  fail(ErrorCode::kInvalidArgument, "preset '" + std::string(id) + "': " + what);
}

std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<ObservationName> observations_for(const std::string& objective,
                                              const std::string& devices) {
  using O = ObservationName;
  const bool hp = devices == "hp";
  const bool bess = devices == "bess_pv" || devices == "dhw_bess_pv";
  const bool dhw = devices == "dhw" || devices == "dhw_bess_pv";
  std::vector<O> out = {O::kHour, O::kDayOfWeek};
  if (!hp) out.push_back(O::kNetElectricityConsumption);
  if (objective == "c") out.push_back(O::kElectricityRate);
  if (objective == "e") out.push_back(O::kCarbonIntensity);
  if (bess) {
    out.push_back(O::kSolarGeneration);
    out.push_back(O::kBatterySoc);
  }
  if (dhw) out.push_back(O::kDhwSoc);
  if (hp) {
    out.push_back(O::kOutdoorTemp);
    out.push_back(O::kIndoorTemp);
    out.push_back(O::kSetpoint);
    out.push_back(O::kAbsTempDelta);
  }
  return out;
}

RewardSpec reward_for(const std::string& objective) {
  RewardSpec r;
  if (objective == "e") r.kind = RewardKind::kEmissions;
  if (objective == "d_o") {
    r.kind = RewardKind::kDiscomfortConsumption;
    r.m = kDefaultOverCoolingMultiplier;
  }
  if (objective == "p") r.kind = RewardKind::kAvgDailyPeak;
  return r;
}

std::unique_ptr<Agent> make_agent(const RunConfig& config) {
  const std::uint64_t agent_seed = config.seed ^ 0xA5A5A5A55A5A5A5Aull;
  switch (config.agent.kind) {
    case AgentKind::kNone: return std::make_unique<NoopAgent>();
    case AgentKind::kRbc: return std::make_unique<RbcAgent>(rbc_kind_for(config));
    case AgentKind::kQLearning:
      return std::make_unique<QLearningAgent>(config.agent.q, agent_seed);
    case AgentKind::kRandom: return std::make_unique<RandomAgent>(agent_seed);
    case AgentKind::kExternal: {
      const auto addr = parse_external_address(config.agent.address);
      std::unique_ptr<LineChannel> channel =
          addr.kind == ExternalAddress::Kind::kExec
              ? spawn_process_channel(addr.command)
              : accept_tcp_channel(addr.host, addr.port, config.agent.timeout * 4);
      return std::make_unique<ExternalAgent>(std::move(channel), config.agent.timeout);
    }
  }
  fail(ErrorCode::kInvalidArgument, "unknown agent kind");
}

struct EpisodeStats {
  std::vector<double> rewards;
  std::size_t clamped = 0;
};

EpisodeStats run_episode(Environment& env, Agent& agent, std::uint64_t seed, bool training) {
  EpisodeStats stats;
  auto obs = env.reset(seed);
  agent.begin_episode(env, training);
  while (!env.done()) {
    const auto actions = agent.act(env, obs);
    if (auto* ext = dynamic_cast<ExternalAgent*>(&agent)) {
      stats.clamped += ext->last_clamped().size();
    }
    auto outcome = env.step(actions);
    stats.clamped += outcome.info.clamped.size();
    stats.rewards.push_back(outcome.district_reward);
    agent.observe(env, outcome);
    obs = std::move(outcome.observations);
  }
  agent.end_episode(env);
  return stats;
}

template <typename Task>
void parallel_for(std::size_t n, std::size_t workers, Task task) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.2f%%", *v);
  return buf;
}

std::string col(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s + " ";
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kNone: return "none";
    case AgentKind::kRbc: return "rbc";
    case AgentKind::kQLearning: return "qlearn";
    case AgentKind::kRandom: return "random";
    case AgentKind::kExternal: return "external";
  }
  return "unknown";
}

std::string RunConfig::id() const {
  std::string buildings;
  for (const auto& b : building_ids) buildings += (buildings.empty() ? "" : "_") + b;
  return algo + "-" + buildings + "-" + objective + "-" + devices;
}

RunConfig preset_config(std::string_view id) {
  const auto parts = split_on(id, '-');
  if (parts.size() != 4) preset_error(id, "expected algo-buildings-objective-devices");
  RunConfig c;
  c.algo = parts[0];
  c.objective = parts[2];
  c.devices = parts[3];
  if (!one_of(kAlgos, c.algo)) preset_error(id, "unknown algorithm '" + c.algo + "'");
  if (!one_of(kObjectives, c.objective)) {
    preset_error(id, "unknown objective '" + c.objective + "'");
  }
  if (!one_of(kDevices, c.devices)) preset_error(id, "unknown device set '" + c.devices + "'");
  c.building_ids = split_on(parts[1], '_');
  for (const auto& b : c.building_ids) {
    if (b.empty() || !std::all_of(b.begin(), b.end(), [](unsigned char ch) {
          return std::isalnum(ch) != 0;
        })) {
      preset_error(id, "bad building list '" + parts[1] + "'");
    }
    if (std::count(c.building_ids.begin(), c.building_ids.end(), b) > 1) {
      preset_error(id, "building '" + b + "' listed twice");
    }
  }

  if (c.algo == "x") {
    if (c.objective != "x") preset_error(id, "uncontrolled runs take objective 'x'");
    if (c.devices != "x" && c.devices != "pv") {
      preset_error(id, "uncontrolled runs take devices 'x' or 'pv'");
    }
  } else {
    if (c.objective == "x") preset_error(id, "controlled runs need an objective");
    if (c.devices == "x" || c.devices == "pv") {
      preset_error(id, "controlled runs need a controllable device");
    }
  }
  if ((c.objective == "d_o") != (c.devices == "hp")) {
    preset_error(id, "objective 'd_o' pairs with devices 'hp' and nothing else");
  }
  if (c.algo == "rbc" && c.devices == "hp") {
    preset_error(id, "no rule-based controller for heat pumps");
  }

  for (const auto& b : c.building_ids) {
    BuildingSetup s;
    s.building_id = b;
    s.pv = c.devices == "pv" || c.devices == "bess_pv" || c.devices == "dhw_bess_pv";
    s.battery = c.devices == "bess_pv" || c.devices == "dhw_bess_pv";
    s.dhw_storage = c.devices == "dhw" || c.devices == "dhw_bess_pv";
    s.heat_pump_control = c.devices == "hp";
    c.env.buildings.push_back(s);
  }
  c.env.observations = observations_for(c.objective, c.devices);
  c.env.reward = reward_for(c.objective);
  c.agent.kind = c.algo == "x"    ? AgentKind::kNone
                 : c.algo == "rbc" ? AgentKind::kRbc
                                   : AgentKind::kQLearning;
  return c;
}

const std::vector<std::string>& table_presets() {
  static const std::vector<std::string> presets = {
      "x-b1_b2-x-x",         "x-b1_b2-x-pv",         "rbc-b1-c-dhw",
      "rbc-b1-e-dhw",        "rbc-b1-c-bess_pv",     "rbc-b1-e-bess_pv",
      "rbc-b1-c-dhw_bess_pv", "rbc-b1-e-dhw_bess_pv", "rbc-b1_b2-p-bess_pv",
      "rlc-b1-c-dhw",        "rlc-b1-e-dhw",         "rlc-b1-c-bess_pv",
      "rlc-b1-e-bess_pv",    "rlc-b1-c-dhw_bess_pv", "rlc-b1-e-dhw_bess_pv",
      "rlc-b1-d_o-hp",       "rlc-b1_b2-p-bess_pv",
  };
  return presets;
}

RbcKind rbc_kind_for(const RunConfig& config) {
  if (config.objective == "c") return RbcKind::kCost;
  if (config.objective == "e") return RbcKind::kEmission;
  if (config.objective == "p") return RbcKind::kPeak;
  fail(ErrorCode::kInvalidArgument,
       "no rule-based controller for objective '" + config.objective + "'");
}

void apply_agent_override(RunConfig& config, std::string_view agent) {
  if (agent == "none") {
    config.agent.kind = AgentKind::kNone;
  } else if (agent == "rbc") {
    config.agent.kind = AgentKind::kRbc;
  } else if (agent == "qlearn") {
    config.agent.kind = AgentKind::kQLearning;
  } else if (agent == "random") {
    config.agent.kind = AgentKind::kRandom;
  } else if (agent.rfind("external:", 0) == 0) {
    config.agent.kind = AgentKind::kExternal;
    config.agent.address = std::string(agent.substr(9));
    parse_external_address(config.agent.address);
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown agent '" + std::string(agent) +
                                          "' (none, rbc, qlearn, random, external:ADDR)");
  }
  if (config.agent.kind == AgentKind::kRbc) {
    rbc_kind_for(config);
    if (config.devices == "hp") {
      fail(ErrorCode::kInvalidArgument, "no rule-based controller for heat pumps");
    }
  }
  const bool controls = !action_slots(config.env).empty();
  if (config.agent.kind != AgentKind::kNone && !controls) {
    fail(ErrorCode::kInvalidArgument,
         "agent '" + std::string(agent) + "' needs a controlled device; " + config.id() +
             " has none");
  }
}

void validate(const RunConfig& config, const DistrictDataset& dataset) {
  for (const auto& id : config.building_ids) {
    if (dataset.find_building(id) == nullptr) {
      fail(ErrorCode::kValidation, "run " + config.id() + " names building '" + id +
                                       "', absent from dataset '" + dataset.name + "'");
    }
  }
  validate(config.env.reward);
  if (config.split) split(dataset.n_steps, dataset.steps_per_day, *config.split);
}

RunResult run(const RunConfig& config, std::shared_ptr<const DistrictDataset> dataset) {
  if (!dataset) fail(ErrorCode::kInvalidArgument, "run without a dataset");
  const auto started = std::chrono::steady_clock::now();
  validate(config, *dataset);

  EnvironmentConfig env_config = config.env;
  env_config.outage = config.outage ? *config.outage : dataset->outage.settings;
  const auto ranges =
      split(dataset->n_steps, dataset->steps_per_day, config.split.value_or(dataset->split_spec));

  RunResult result;
  result.config = config;
  auto agent = make_agent(config);

  if (agent->learns()) {
    const std::size_t epochs = config.epochs.value_or(
        config.agent.kind == AgentKind::kQLearning ? kDefaultEpochs : 0);
    Environment train(dataset, env_config, ranges.train);
    if (auto* q = dynamic_cast<QLearningAgent*>(agent.get())) {
      q->prepare(train, epochs * ranges.train.size());
    }
    for (std::size_t e = 0; e < epochs; ++e) {
      result.clamped_actions += run_episode(train, *agent, config.seed + 1 + e, true).clamped;
    }
    result.epochs_used = epochs;
  }

  Environment test(dataset, env_config, ranges.test);
  auto stats = run_episode(test, *agent, config.seed, false);
  result.clamped_actions += stats.clamped;
  result.test_rewards = std::move(stats.rewards);
  result.test_return = discounted_return(result.test_rewards, config.agent.q.gamma);
  result.trace = test.trace();
  result.report = compute_report(config.id(), result.trace, dataset->tariff);

  // Deltas against the uncontrolled district, with and without PV.
  std::string all_ids;
  bool all_pv = true;
  for (const auto& b : dataset->buildings) {
    all_ids += (all_ids.empty() ? "" : "_") + b.id;
    all_pv = all_pv && b.pv.has_value();
  }
  std::vector<std::string> baselines = {"x-" + all_ids + "-x-x"};
  if (all_pv) baselines.push_back("x-" + all_ids + "-x-pv");
  for (const auto& id : baselines) {
    RunConfig base = preset_config(id);
    base.env.outage = env_config.outage;
    Environment env(dataset, base.env, ranges.test);
    NoopAgent noop;
    run_episode(env, noop, config.seed, false);
    result.report.comparisons.push_back(
        compare(result.report, compute_report(id, env.trace(), dataset->tariff)));
  }

  result.agent_name = agent->name();
  if (auto* ext = dynamic_cast<ExternalAgent*>(agent.get())) ext->finish(report_json(result.report));
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::vector<MatrixEntry> run_matrix(const std::vector<RunConfig>& configs,
                                    std::shared_ptr<const DistrictDataset> dataset,
                                    std::size_t workers) {
  std::vector<MatrixEntry> entries(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) {
    auto& e = entries[i];
    e.config_id = configs[i].id();
    e.baseline = configs[i].baseline();
    try {
      e.result = run(configs[i], dataset);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  });
  return entries;
}

std::vector<MSweepRow> m_sweep(const RunConfig& base, const std::vector<double>& multipliers,
                               std::shared_ptr<const DistrictDataset> dataset,
                               std::size_t workers) {
  if (base.env.reward.kind != RewardKind::kDiscomfortConsumption) {
    fail(ErrorCode::kInvalidArgument,
         "m-sweep needs a discomfort_consumption reward; " + base.id() + " uses " +
             to_string(base.env.reward.kind));
  }
  std::vector<MSweepRow> rows(multipliers.size());
  parallel_for(multipliers.size(), workers, [&](std::size_t i) {
    auto& row = rows[i];
    row.m = multipliers[i];
    try {
      RunConfig c = base;
      c.env.reward.m = multipliers[i];
      const auto r = run(c, dataset);
      row.discomfort = r.report.district.discomfort;
      row.consumption = r.report.district.consumption;
      row.deviation = temperature_deviation(r.trace, 0);
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  });
  if (!rows.empty() && rows.front().error.empty()) {
    const auto& ref = rows.front();
    for (auto& row : rows) {
      if (!row.error.empty()) continue;
      row.discomfort_delta = percent_delta(row.discomfort, ref.discomfort);
      row.over_cool_delta =
          percent_delta(row.deviation.over_cool_mean, ref.deviation.over_cool_mean);
      row.under_cool_delta =
          percent_delta(row.deviation.under_cool_mean, ref.deviation.under_cool_mean);
      row.consumption_delta = percent_delta(row.consumption, ref.consumption);
    }
  }
  return rows;
}

std::string run_json(const RunResult& result) {
  const auto& c = result.config;
  Json doc;
  doc["schema"] = 1;
  doc["config_id"] = c.id();
  doc["agent"] = result.agent_name;
  doc["seed"] = c.seed;
  doc["epochs"] = result.epochs_used;
  doc["reward"] = {{"kind", to_string(c.env.reward.kind)}, {"m", c.env.reward.m}};
  Json obs = Json::array();
  for (auto name : c.env.observations) obs.push_back(std::string(to_string(name)));
  doc["observations"] = obs;
  doc["test_return"] = result.test_return;
  doc["clamped_actions"] = result.clamped_actions;
  doc["report"] = Json::parse(report_json(result.report));
  return doc.dump(2) + "\n";
}

std::string run_text(const RunResult& result) {
  return "agent: " + result.agent_name + "  epochs " + std::to_string(result.epochs_used) + "\n" +
         report_text(result.report);
}

void write_run_outputs(const RunResult& result, const DistrictDataset& dataset,
                       const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + directory.string() + ": " + ec.message());
  write_file(directory / "kpis.json", run_json(result));
  write_file(directory / "kpis.txt", run_text(result));
  write_trace_csv(result.trace, directory / "trace.csv");
  write_file(directory / "daily_peaks.csv",
             daily_peaks_csv(result.report, dataset.axis, dataset.steps_per_day));
}

std::string matrix_json(const std::vector<MatrixEntry>& entries) {
  Json runs = Json::array();
  for (const auto& e : entries) {
    Json entry;
    entry["config_id"] = e.config_id;
    entry["baseline"] = e.baseline;
    if (e.result) {
      entry["status"] = "ok";
      entry["kpis"] = Json::parse(run_json(*e.result));
    } else {
      entry["status"] = "error";
      entry["error"] = e.error;
    }
    runs.push_back(entry);
  }
  Json doc;
  doc["schema"] = 1;
  doc["runs"] = runs;
  return doc.dump(2) + "\n";
}

std::string matrix_text(const std::vector<MatrixEntry>& entries) {
  std::string out = col("config", 24, true) + col("bldg", 6, true) + col("cost $", 10) +
                    col("kgCO2e", 10) + col("discomf", 10) + col("kWh", 10) +
                    col("peak kW", 9) + "  deltas vs baselines (cost / emissions / kWh / peak)\n";
  for (const auto& e : entries) {
    if (!e.result) {
      out += col(e.config_id, 24, true) + "ERROR: " + e.error + "\n";
      continue;
    }
    const auto& rep = e.result->report;
    for (const auto& b : rep.buildings) {
      out += col(e.config_id, 24, true) + col(b.id, 6, true) + col(fixed(b.cost), 10) +
             col(fixed(b.emissions), 10) + col(fixed(b.discomfort), 10) +
             col(fixed(b.consumption), 10) + col("", 9);
      for (const auto& c : rep.comparisons) {
        for (const auto& d : c.buildings) {
          if (d.id != b.id) continue;
          out += "  " + c.baseline + ": " + pct(d.cost) + " / " + pct(d.emissions) + " / " +
                 pct(d.consumption);
        }
      }
      out += "\n";
    }
    out += col(e.config_id, 24, true) + col("dist", 6, true) + col(fixed(rep.district.cost), 10) +
           col(fixed(rep.district.emissions), 10) + col(fixed(rep.district.discomfort), 10) +
           col(fixed(rep.district.consumption), 10) + col(fixed(rep.district.avg_daily_peak), 9);
    for (const auto& c : rep.comparisons) {
      if (!c.district) continue;
      out += "  " + c.baseline + ": " + pct(c.district->cost) + " / " +
             pct(c.district->emissions) + " / " + pct(c.district->consumption) + " / " +
             pct(c.district->avg_daily_peak);
    }
    out += "\n";
  }
  return out;
}

void write_matrix_outputs(const std::vector<MatrixEntry>& entries,
                          const DistrictDataset& dataset,
                          const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + directory.string() + ": " + ec.message());
  for (const auto& e : entries) {
    if (e.result) write_run_outputs(*e.result, dataset, directory / e.config_id);
  }
  write_file(directory / "comparison.json", matrix_json(entries));
  write_file(directory / "comparison.txt", matrix_text(entries));
}

std::string m_sweep_json(const std::vector<MSweepRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json row;
    row["m"] = r.m;
    if (!r.error.empty()) {
      row["error"] = r.error;
      out.push_back(row);
      continue;
    }
    row["discomfort"] = r.discomfort;
    row["over_cool_mean"] = r.deviation.over_cool_mean;
    row["over_cool_std"] = r.deviation.over_cool_std;
    row["over_cool_steps"] = r.deviation.over_cool_steps;
    row["under_cool_mean"] = r.deviation.under_cool_mean;
    row["under_cool_std"] = r.deviation.under_cool_std;
    row["under_cool_steps"] = r.deviation.under_cool_steps;
    row["consumption"] = r.consumption;
    row["discomfort_pct"] = optional_number(r.discomfort_delta);
    row["over_cool_pct"] = optional_number(r.over_cool_delta);
    row["under_cool_pct"] = optional_number(r.under_cool_delta);
    row["consumption_pct"] = optional_number(r.consumption_delta);
    out.push_back(row);
  }
  Json doc;
  doc["schema"] = 1;
  doc["rows"] = out;
  return doc.dump(2) + "\n";
}

std::string m_sweep_text(const std::vector<MSweepRow>& rows) {
  std::string out = col("m", 6) + col("discomfort", 22) + col("over-cool C", 24) +
                    col("under-cool C", 24) + col("consumption kWh", 24) + "\n";
  for (const auto& r : rows) {
    out += col(fixed(r.m, 1), 6);
    if (!r.error.empty()) {
      out += "  ERROR: " + r.error + "\n";
      continue;
    }
    out += col(fixed(r.discomfort, 2) + " (" + pct(r.discomfort_delta) + ")", 22) +
           col(fixed(r.deviation.over_cool_mean, 2) + "+-" + fixed(r.deviation.over_cool_std, 2) +
                   " (" + pct(r.over_cool_delta) + ")",
               24) +
           col(fixed(r.deviation.under_cool_mean, 2) + "+-" +
                   fixed(r.deviation.under_cool_std, 2) + " (" + pct(r.under_cool_delta) + ")",
               24) +
           col(fixed(r.consumption, 2) + " (" + pct(r.consumption_delta) + ")", 24) + "\n";
  }
  return out;
}

void write_m_sweep_outputs(const std::vector<MSweepRow>& rows,
                           const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + directory.string() + ": " + ec.message());
  write_file(directory / "m_sweep.json", m_sweep_json(rows));
  write_file(directory / "m_sweep.txt", m_sweep_text(rows));
}

std::string dataset_summary_json(const DistrictDataset& d) {
  Json doc;
  doc["name"] = d.name;
  doc["start"] = format_timestamp(d.axis.start);
  doc["step_minutes"] = d.axis.step_minutes;
  doc["steps"] = d.n_steps;
  doc["days"] = d.n_steps / d.steps_per_day;
  const auto r = d.ranges();
  doc["train"] = {{"begin", r.train.begin}, {"end", r.train.end}};
  doc["test"] = {{"begin", r.test.begin}, {"end", r.test.end}};
  const char* modes[] = {"none", "static", "stochastic"};
  doc["outage"] = modes[static_cast<int>(d.outage.settings.mode)];
  Json buildings = Json::array();
  for (const auto& b : d.buildings) {
    Json e;
    e["id"] = b.id;
    const auto total = [](const TimeSeries& s) {
      double t = 0.0;
      for (double v : s.values) t += v;
      return t;
    };
    e["cooling_load_kwh"] = total(b.cooling_load);
    e["dhw_load_kwh"] = total(b.dhw_load);
    e["plug_load_kwh"] = total(b.plug_load);
    if (b.heat_pump) e["heat_pump_kw"] = b.heat_pump->nominal_power;
    if (b.dhw_heater) e["dhw_heater_kw"] = b.dhw_heater->nominal_power;
    if (b.dhw_storage) e["dhw_storage_kwh"] = b.dhw_storage->capacity;
    if (b.battery) {
      e["battery_kwh"] = b.battery->capacity;
      e["battery_kw"] = b.battery->max_charge_power;
    }
    if (b.pv) e["pv_kw"] = b.pv->nominal_power;
    e["surrogate"] = b.surrogate != nullptr;
    buildings.push_back(e);
  }
  doc["buildings"] = buildings;
  return doc.dump(2) + "\n";
}

}  // namespace gridbench
