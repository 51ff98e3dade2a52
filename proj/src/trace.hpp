#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace gridbench {

// Everything settled for one building in one step. Electric quantities are
// kWh at the building bus; thermal quantities are kWh of heat.
struct BuildingStepRecord {
  double net_electricity = 0.0;  // e(t); negative is export
  double grid_import = 0.0;
  double grid_export = 0.0;

  double pv_generation = 0.0;
  double pv_used = 0.0;
  double pv_curtailed = 0.0;

  double plug_demand = 0.0;
  double plug_served = 0.0;

  double cop = 0.0;
  double cooling_reference = 0.0;  // dataset ideal load
  double cooling_delivered = 0.0;
  double hvac_electric_demand = 0.0;
  double hvac_electric_served = 0.0;

  double dhw_demand = 0.0;
  double dhw_served = 0.0;
  double heater_thermal = 0.0;
  double heater_electric_demand = 0.0;
  double heater_electric_served = 0.0;

  double dhw_storage_in = 0.0;    // thermal, from heater
  double dhw_storage_out = 0.0;   // thermal, to DHW demand
  double dhw_storage_loss = 0.0;
  double dhw_storage_soc = 0.0;   // fraction of capacity after the step

  double battery_in = 0.0;        // electric drawn
  double battery_out = 0.0;       // electric delivered
  double battery_loss = 0.0;
  double battery_soc = 0.0;       // fraction of capacity after the step

  double dhw_storage_action = 0.0;  // as applied, after clamping
  double battery_action = 0.0;
  double heat_pump_action = 0.0;

  double indoor_temp = 0.0;  // T(t), end of step
  double setpoint = 0.0;     // T_spt(t)
  double rate = 0.0;         // R(t)
  double carbon = 0.0;       // G(t)

  double unserved_electric = 0.0;  // kWh of curtailed load demand
  double unserved_cooling = 0.0;   // kWh thermal
  double unserved_dhw = 0.0;       // kWh thermal
  bool outage = false;
};

struct EpisodeTrace {
  std::vector<std::string> building_ids;
  std::vector<std::size_t> steps;  // absolute dataset step index
  std::vector<int> hours;
  std::vector<int> days_of_week;
  std::vector<std::vector<BuildingStepRecord>> buildings;  // [building][step]
  std::vector<double> district_power;  // P(t), kW
  std::vector<std::uint8_t> outage;
  double step_hours = 1.0;
  std::size_t steps_per_day = 24;

  std::size_t size() const { return steps.size(); }
  std::size_t building_index(const std::string& id) const;
};

inline constexpr int kTraceSchemaVersion = 1;

// One row per (step, building) followed by a district row per step.
void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path);
std::string trace_csv(const EpisodeTrace& trace);

}  // namespace gridbench
