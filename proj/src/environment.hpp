#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "evaluation.hpp"
#include "outage.hpp"
#include "trace.hpp"

namespace gridbench {

enum class ObservationName {
  kHour,
  kDayOfWeek,
  kNetElectricityConsumption,
  kElectricityRate,
  kCarbonIntensity,
  kSolarGeneration,
  kBatterySoc,
  kDhwSoc,
  kOutdoorTemp,
  kIndoorTemp,
  kSetpoint,
  kAbsTempDelta,
};

inline constexpr std::size_t kObservationCount = 12;

std::string_view to_string(ObservationName name);
// Throws kInvalidArgument for names outside the twelve.
ObservationName parse_observation_name(std::string_view name);
const std::vector<ObservationName>& all_observation_names();

enum class ControlledDevice { kDhwStorage, kBattery, kHeatPump };

std::string_view to_string(ControlledDevice device);

// Which devices exist for one building in a configuration. Storage and PV
// absent here are absent from the simulation even if the dataset sizes them.
struct BuildingSetup {
  std::string building_id;
  bool pv = false;
  bool dhw_storage = false;
  bool battery = false;
  bool heat_pump_control = false;

  std::vector<ControlledDevice> controlled() const;
};

struct FutileActionPenalty {
  bool enabled = false;
  double coefficient = 0.0;  // reward units per unit of ineffective |action|
};

enum class DynamicsKind { kAuto, kRc, kSurrogate };

struct EnvironmentConfig {
  std::vector<BuildingSetup> buildings;
  std::vector<ObservationName> observations;  // same active set per building
  RewardSpec reward;
  FutileActionPenalty futile_penalty;
  DynamicsKind dynamics = DynamicsKind::kAuto;
  OutageSettings outage;
};

struct BuildingAction {
  std::optional<double> dhw_storage;
  std::optional<double> battery;
  std::optional<double> heat_pump;
};

using ActionVector = std::vector<BuildingAction>;  // one per configured building

struct ObservationVector {
  std::vector<ObservationName> names;
  std::vector<double> values;

  double get(ObservationName name) const;
};

struct StepInfo {
  bool outage = false;
  double unserved_energy = 0.0;        // kWh, all buildings
  std::vector<std::string> clamped;    // "b1.battery: 1.7 -> 1"
};

struct StepOutcome {
  std::vector<ObservationVector> observations;  // per building
  std::vector<double> rewards;                  // per building
  double district_reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Flat agent-facing names, "<building>.<device>", in config order.
struct ActionSlot {
  std::size_t building = 0;
  ControlledDevice device = ControlledDevice::kBattery;
  std::string name;
  double low = 0.0;
  double high = 0.0;
};

std::vector<ActionSlot> action_slots(const EnvironmentConfig& config);
ActionVector unflatten_actions(const EnvironmentConfig& config,
                               std::span<const double> values);

// Steps one district through a range of dataset steps. Single-writer; distinct
// instances share nothing mutable.
class Environment {
 public:
  Environment(std::shared_ptr<const DistrictDataset> dataset, EnvironmentConfig config,
              StepRange range);

  // Resets state and returns the first observations. Deterministic in seed.
  std::vector<ObservationVector> reset(std::uint64_t seed);
  StepOutcome step(const ActionVector& actions);

  bool done() const { return cursor_ >= range_.end; }
  std::size_t current_step() const { return cursor_; }
  const StepRange& range() const { return range_; }
  const EnvironmentConfig& config() const { return config_; }
  const DistrictDataset& dataset() const { return *dataset_; }
  const EpisodeTrace& trace() const { return trace_; }
  const OutageSignal& outage_signal() const { return outage_; }
  std::vector<ObservationVector> observations() const;

  ObservationVector assemble_observations(std::size_t building,
                                          std::span<const ObservationName> active) const;

 private:
  struct BuildingRuntime {
    const BuildingDataset* data = nullptr;
    BuildingSetup setup;
    StorageState dhw_storage;
    StorageState battery;
    double indoor_temp = 0.0;
    double last_net_electricity = 0.0;
    double uncontrolled_excess = 0.0;  // degC above setpoint from curtailed cooling
    std::deque<DynamicsSample> history;
    bool use_surrogate = false;
  };

  BuildingStepRecord settle(BuildingRuntime& b, const BuildingAction& action,
                            bool grid_down, StepInfo& info);
  double clamp_action(double value, double low, double high, const std::string& name,
                      StepInfo& info) const;

  std::shared_ptr<const DistrictDataset> dataset_;
  EnvironmentConfig config_;
  StepRange range_;
  std::vector<BuildingRuntime> runtime_;
  OutageSignal outage_;
  std::size_t cursor_ = 0;
  EpisodeTrace trace_;
};

}  // namespace gridbench
