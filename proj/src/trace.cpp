#include "trace.hpp"

#include <algorithm>
#include <fstream>

#include "csv.hpp"
#include "error.hpp"

namespace gridbench {

namespace {

struct Column {
  const char* name;
  double BuildingStepRecord::*field;
};

constexpr Column kColumns[] = {
    {"net_electricity_kwh", &BuildingStepRecord::net_electricity},
    {"grid_import_kwh", &BuildingStepRecord::grid_import},
    {"grid_export_kwh", &BuildingStepRecord::grid_export},
    {"pv_generation_kwh", &BuildingStepRecord::pv_generation},
    {"pv_used_kwh", &BuildingStepRecord::pv_used},
    {"pv_curtailed_kwh", &BuildingStepRecord::pv_curtailed},
    {"plug_demand_kwh", &BuildingStepRecord::plug_demand},
    {"plug_served_kwh", &BuildingStepRecord::plug_served},
    {"cop", &BuildingStepRecord::cop},
    {"cooling_reference_kwh", &BuildingStepRecord::cooling_reference},
    {"cooling_delivered_kwh", &BuildingStepRecord::cooling_delivered},
    {"hvac_electric_demand_kwh", &BuildingStepRecord::hvac_electric_demand},
    {"hvac_electric_served_kwh", &BuildingStepRecord::hvac_electric_served},
    {"dhw_demand_kwh", &BuildingStepRecord::dhw_demand},
    {"dhw_served_kwh", &BuildingStepRecord::dhw_served},
    {"heater_thermal_kwh", &BuildingStepRecord::heater_thermal},
    {"heater_electric_demand_kwh", &BuildingStepRecord::heater_electric_demand},
    {"heater_electric_served_kwh", &BuildingStepRecord::heater_electric_served},
    {"dhw_storage_in_kwh", &BuildingStepRecord::dhw_storage_in},
    {"dhw_storage_out_kwh", &BuildingStepRecord::dhw_storage_out},
    {"dhw_storage_loss_kwh", &BuildingStepRecord::dhw_storage_loss},
    {"dhw_storage_soc", &BuildingStepRecord::dhw_storage_soc},
    {"battery_in_kwh", &BuildingStepRecord::battery_in},
    {"battery_out_kwh", &BuildingStepRecord::battery_out},
    {"battery_loss_kwh", &BuildingStepRecord::battery_loss},
    {"battery_soc", &BuildingStepRecord::battery_soc},
    {"dhw_storage_action", &BuildingStepRecord::dhw_storage_action},
    {"battery_action", &BuildingStepRecord::battery_action},
    {"heat_pump_action", &BuildingStepRecord::heat_pump_action},
    {"indoor_temp_c", &BuildingStepRecord::indoor_temp},
    {"setpoint_c", &BuildingStepRecord::setpoint},
    {"rate_usd_per_kwh", &BuildingStepRecord::rate},
    {"carbon_kg_per_kwh", &BuildingStepRecord::carbon},
    {"unserved_electric_kwh", &BuildingStepRecord::unserved_electric},
    {"unserved_cooling_kwh", &BuildingStepRecord::unserved_cooling},
    {"unserved_dhw_kwh", &BuildingStepRecord::unserved_dhw},
};

}  // namespace

std::size_t EpisodeTrace::building_index(const std::string& id) const {
  const auto it = std::find(building_ids.begin(), building_ids.end(), id);
  if (it == building_ids.end()) {
    fail(ErrorCode::kInvalidArgument, "trace has no building '" + id + "'");
  }
  return static_cast<std::size_t>(it - building_ids.begin());
}

std::string trace_csv(const EpisodeTrace& trace) {
  std::string out = "# gridbench trace schema " + std::to_string(kTraceSchemaVersion) + "\n";
  out += "step,hour,day_of_week,building,outage";
  for (const auto& c : kColumns) out += std::string(",") + c.name;
  out += ",district_power_kw\n";

  for (std::size_t t = 0; t < trace.size(); ++t) {
    const std::string prefix = std::to_string(trace.steps[t]) + "," +
                               std::to_string(trace.hours[t]) + "," +
                               std::to_string(trace.days_of_week[t]) + ",";
    double district_net = 0.0;
    for (std::size_t b = 0; b < trace.building_ids.size(); ++b) {
      const auto& rec = trace.buildings[b][t];
      district_net += rec.net_electricity;
      out += prefix + trace.building_ids[b] + "," + (rec.outage ? "1" : "0");
      for (const auto& c : kColumns) out += "," + format_double(rec.*c.field);
      out += ",\n";
    }
    out += prefix + "district," + (trace.outage[t] ? "1" : "0") + "," +
           format_double(district_net);
    for (std::size_t i = 1; i < std::size(kColumns); ++i) out += ",";
    out += "," + format_double(trace.district_power[t]) + "\n";
  }
  return out;
}

void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << trace_csv(trace);
}

}  // namespace gridbench
