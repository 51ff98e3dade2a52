#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agents.hpp"
#include "dataset.hpp"
#include "environment.hpp"
#include "evaluation.hpp"

namespace gridbench {

inline constexpr std::size_t kDefaultEpochs = 150;
inline constexpr double kDefaultOverCoolingMultiplier = 3.0;

enum class AgentKind { kNone, kRbc, kQLearning, kRandom, kExternal };

std::string to_string(AgentKind kind);

struct AgentSpec {
  AgentKind kind = AgentKind::kNone;
  QLearningOptions q;
  std::string address;  // external only
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
};

// One row of the benchmark matrix: `algo-buildings-objective-devices`.
struct RunConfig {
  std::string algo = "x";         // x | rbc | rlc
  std::vector<std::string> building_ids;
  std::string objective = "x";    // x | c | e | d_o | p
  std::string devices = "x";      // x | pv | dhw | bess_pv | dhw_bess_pv | hp

  EnvironmentConfig env;
  AgentSpec agent;
  std::uint64_t seed = 0;
  // Learning agents only. Unset: kDefaultEpochs for Q-learning, 0 for external.
  std::optional<std::size_t> epochs;
  std::optional<SplitSpec> split;
  // Unset: the dataset's outage settings.
  std::optional<OutageSettings> outage;

  std::string id() const;
  bool baseline() const { return algo == "x"; }
};

// Throws kInvalidArgument for names outside the convention or pairings the
// matrix does not define (e.g. rbc with heat pump control).
RunConfig preset_config(std::string_view id);
const std::vector<std::string>& table_presets();

// "none" | "rbc" | "qlearn" | "random" | "external:ADDR"
void apply_agent_override(RunConfig& config, std::string_view agent);
// Objective-matched controller for rbc runs.
RbcKind rbc_kind_for(const RunConfig& config);

// Device, series and agent checks against a concrete dataset.
void validate(const RunConfig& config, const DistrictDataset& dataset);

struct RunResult {
  RunConfig config;
  std::string agent_name;
  KpiReport report;
  EpisodeTrace trace;
  std::vector<double> test_rewards;  // district reward per test step
  double test_return = 0.0;          // discounted with the agent's gamma
  std::size_t epochs_used = 0;
  std::size_t clamped_actions = 0;
  double wall_seconds = 0.0;
};

RunResult run(const RunConfig& config, std::shared_ptr<const DistrictDataset> dataset);

struct MatrixEntry {
  std::string config_id;
  bool baseline = false;
  std::optional<RunResult> result;
  std::string error;
};

// Entries follow the input order whatever the worker count.
std::vector<MatrixEntry> run_matrix(const std::vector<RunConfig>& configs,
                                    std::shared_ptr<const DistrictDataset> dataset,
                                    std::size_t workers);

struct MSweepRow {
  double m = 1.0;
  std::string error;
  double discomfort = 0.0;
  double consumption = 0.0;
  TemperatureDeviation deviation;
  // Percent change against the first row.
  std::optional<double> discomfort_delta, over_cool_delta, under_cool_delta, consumption_delta;
};

std::vector<MSweepRow> m_sweep(const RunConfig& base, const std::vector<double>& multipliers,
                               std::shared_ptr<const DistrictDataset> dataset,
                               std::size_t workers);

// kpis.json; free of timings so identical runs give identical bytes.
std::string run_json(const RunResult& result);
// Agent line followed by the KPI report.
std::string run_text(const RunResult& result);
void write_run_outputs(const RunResult& result, const DistrictDataset& dataset,
                       const std::filesystem::path& directory);

std::string matrix_json(const std::vector<MatrixEntry>& entries);
std::string matrix_text(const std::vector<MatrixEntry>& entries);
void write_matrix_outputs(const std::vector<MatrixEntry>& entries,
                          const DistrictDataset& dataset,
                          const std::filesystem::path& directory);

std::string m_sweep_json(const std::vector<MSweepRow>& rows);
std::string m_sweep_text(const std::vector<MSweepRow>& rows);
void write_m_sweep_outputs(const std::vector<MSweepRow>& rows,
                           const std::filesystem::path& directory);

std::string dataset_summary_json(const DistrictDataset& dataset);

}  // namespace gridbench
