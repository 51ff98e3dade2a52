#include "environment.hpp"

#include <algorithm>
#include <cmath>

#include "csv.hpp"
#include "energy_systems.hpp"
#include "error.hpp"

namespace gridbench {

namespace {

constexpr std::string_view kObservationNames[kObservationCount] = {
    "hour",          "day_of_week",  "net_electricity_consumption",
    "electricity_rate", "carbon_intensity", "solar_generation",
    "battery_soc",   "dhw_soc",      "outdoor_temp",
    "indoor_temp",   "setpoint",     "abs_temp_delta"};

[[noreturn]] void config_error(const std::string& what) {
  fail(ErrorCode::kValidation, "environment config: " + what);
}

}  // namespace

std::string_view to_string(ObservationName name) {
  return kObservationNames[static_cast<std::size_t>(name)];
}

ObservationName parse_observation_name(std::string_view name) {
  for (std::size_t i = 0; i < kObservationCount; ++i) {
    if (kObservationNames[i] == name) return static_cast<ObservationName>(i);
  }
  fail(ErrorCode::kInvalidArgument, "unknown observation '" + std::string(name) + "'");
}

const std::vector<ObservationName>& all_observation_names() {
  static const std::vector<ObservationName> names = [] {
    std::vector<ObservationName> out;
    for (std::size_t i = 0; i < kObservationCount; ++i) {
      out.push_back(static_cast<ObservationName>(i));
    }
    return out;
  }();
  return names;
}

std::string_view to_string(ControlledDevice device) {
  switch (device) {
    case ControlledDevice::kDhwStorage: return "dhw_storage";
    case ControlledDevice::kBattery: return "battery";
    case ControlledDevice::kHeatPump: return "heat_pump";
  }
  return "unknown";
}

std::vector<ControlledDevice> BuildingSetup::controlled() const {
  std::vector<ControlledDevice> out;
  if (dhw_storage) out.push_back(ControlledDevice::kDhwStorage);
  if (battery) out.push_back(ControlledDevice::kBattery);
  if (heat_pump_control) out.push_back(ControlledDevice::kHeatPump);
  return out;
}

double ObservationVector::get(ObservationName name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  fail(ErrorCode::kInvalidArgument,
       "observation '" + std::string(to_string(name)) + "' is not active");
}

std::vector<ActionSlot> action_slots(const EnvironmentConfig& config) {
  std::vector<ActionSlot> slots;
  for (std::size_t b = 0; b < config.buildings.size(); ++b) {
    for (auto device : config.buildings[b].controlled()) {
      ActionSlot s;
      s.building = b;
      s.device = device;
      s.name = config.buildings[b].building_id + "." + std::string(to_string(device));
      s.low = device == ControlledDevice::kHeatPump ? 0.0 : -1.0;
      s.high = 1.0;
      slots.push_back(s);
    }
  }
  return slots;
}

ActionVector unflatten_actions(const EnvironmentConfig& config,
                               std::span<const double> values) {
  const auto slots = action_slots(config);
  if (values.size() != slots.size()) {
    fail(ErrorCode::kInvalidArgument, "expected " + std::to_string(slots.size()) +
                                          " action values, got " +
                                          std::to_string(values.size()));
  }
  ActionVector actions(config.buildings.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& a = actions[slots[i].building];
    switch (slots[i].device) {
      case ControlledDevice::kDhwStorage: a.dhw_storage = values[i]; break;
      case ControlledDevice::kBattery: a.battery = values[i]; break;
      case ControlledDevice::kHeatPump: a.heat_pump = values[i]; break;
    }
  }
  return actions;
}

Environment::Environment(std::shared_ptr<const DistrictDataset> dataset,
                         EnvironmentConfig config, StepRange range)
    : dataset_(std::move(dataset)), config_(std::move(config)), range_(range) {
  if (!dataset_) config_error("no dataset");
  const auto& d = *dataset_;
  if (range_.begin >= range_.end || range_.end > d.n_steps) {
    config_error("step range [" + std::to_string(range_.begin) + ", " +
                 std::to_string(range_.end) + ") outside dataset of " +
                 std::to_string(d.n_steps) + " steps");
  }
  if (config_.buildings.empty()) config_error("no buildings");
  validate(config_.reward);

  for (const auto& setup : config_.buildings) {
    const BuildingDataset* data = d.find_building(setup.building_id);
    if (data == nullptr) config_error("unknown building '" + setup.building_id + "'");
    const auto missing = [&](const char* what) {
      config_error("building '" + setup.building_id + "' uses " + what +
                   " but the dataset defines none");
    };
    if (setup.battery && !data->battery) missing("a battery");
    if (setup.dhw_storage && !data->dhw_storage) missing("a DHW storage");
    if (setup.pv && !data->pv) missing("PV");
    if (setup.heat_pump_control && !data->heat_pump) missing("a heat pump");

    BuildingRuntime rt;
    rt.data = data;
    rt.setup = setup;
    rt.use_surrogate = config_.dynamics == DynamicsKind::kSurrogate ||
                       (config_.dynamics == DynamicsKind::kAuto && data->surrogate);
    if (rt.use_surrogate && !data->surrogate) missing("a surrogate dynamics model");

    for (auto name : config_.observations) {
      if (name == ObservationName::kBatterySoc && !setup.battery) {
        config_error("battery_soc observed for '" + setup.building_id + "' without a battery");
      }
      if (name == ObservationName::kDhwSoc && !setup.dhw_storage) {
        config_error("dhw_soc observed for '" + setup.building_id + "' without DHW storage");
      }
    }
    runtime_.push_back(std::move(rt));
  }

  if (config_.outage.mode == OutageMode::kStatic &&
      config_.outage.static_series.size() != d.n_steps) {
    config_error("static outage series length " +
                 std::to_string(config_.outage.static_series.size()) +
                 " differs from dataset horizon " + std::to_string(d.n_steps));
  }
  if (config_.outage.mode == OutageMode::kStochastic) validate(config_.outage.params);
  reset(0);
}

std::vector<ObservationVector> Environment::reset(std::uint64_t seed) {
  const auto& d = *dataset_;
  cursor_ = range_.begin;

  switch (config_.outage.mode) {
    case OutageMode::kNone:
      outage_ = OutageSignal{};
      outage_.grid_down.assign(d.n_steps, 0);
      break;
    case OutageMode::kStatic:
      outage_ = outage_from_series(config_.outage.static_series, d.n_steps);
      break;
    case OutageMode::kStochastic: {
      ReliabilityParams params = config_.outage.params;
      params.seed = params.seed ^ (seed * 0x9E3779B97F4A7C15ull);
      outage_ = generate_outages(params, d.n_steps / d.steps_per_day, d.steps_per_day);
      break;
    }
  }

  for (auto& b : runtime_) {
    const auto& data = *b.data;
    b.dhw_storage.soc = data.dhw_storage ? data.dhw_storage->soc_floor() : 0.0;
    b.battery.soc = data.battery ? data.battery->soc_floor() : 0.0;
    b.indoor_temp = data.setpoint[range_.begin];
    b.last_net_electricity = 0.0;
    b.uncontrolled_excess = 0.0;
    b.history.clear();
    if (b.use_surrogate) {
      const DynamicsSample initial{b.indoor_temp, 0.0, d.outdoor_temp[range_.begin],
                                   d.axis.hour_at(range_.begin),
                                   d.axis.day_of_week_at(range_.begin)};
      b.history.assign(data.surrogate->lookback, initial);
    }
  }

  trace_ = EpisodeTrace{};
  trace_.step_hours = d.axis.step_hours();
  trace_.steps_per_day = d.steps_per_day;
  trace_.buildings.resize(runtime_.size());
  for (const auto& b : runtime_) trace_.building_ids.push_back(b.setup.building_id);
  return observations();
}

double Environment::clamp_action(double value, double low, double high,
                                 const std::string& name, StepInfo& info) const {
  if (!std::isfinite(value)) {
    fail(ErrorCode::kInvalidArgument, "action " + name + " is not finite");
  }
  const double clamped = std::clamp(value, low, high);
  if (clamped != value) {
    info.clamped.push_back(name + ": " + format_double(value) + " -> " +
                           format_double(clamped));
  }
  return clamped;
}

BuildingStepRecord Environment::settle(BuildingRuntime& b, const BuildingAction& action,
                                       bool grid_down, StepInfo& info) {
  const auto& d = *dataset_;
  const auto& data = *b.data;
  const std::size_t t = cursor_;
  const double dt = d.axis.step_hours();
  const std::string& id = b.setup.building_id;

  BuildingStepRecord rec;
  rec.outage = grid_down;
  rec.setpoint = data.setpoint[t];
  rec.rate = d.rate_at(t);
  rec.carbon = d.carbon[t];
  rec.plug_demand = data.plug_load[t];

  // (1) space cooling
  double cooling = 0.0;
  double hvac_electric = 0.0;
  rec.cooling_reference = data.cooling_load[t];
  if (data.heat_pump) {
    rec.cop = heat_pump_cop(*data.heat_pump, d.outdoor_temp[t]);
    if (b.setup.heat_pump_control) {
      rec.heat_pump_action =
          clamp_action(action.heat_pump.value_or(0.0), 0.0, 1.0, id + ".heat_pump", info);
      const auto out = device_step(*data.heat_pump, rec.cop, rec.heat_pump_action, dt);
      hvac_electric = out.electric_kwh;
      cooling = out.thermal_kwh;
    } else {
      cooling = rec.cooling_reference;
      hvac_electric = cooling / rec.cop;
    }
  }

  // (2) domestic hot water, heater plus optional store
  rec.dhw_demand = data.dhw_load[t];
  const double heater_eff = data.dhw_heater ? data.dhw_heater->efficiency : 1.0;
  StorageStepResult tes{b.dhw_storage, 0.0, 0.0, 0.0};
  StorageLimits tes_limits;
  if (b.setup.dhw_storage) {
    rec.dhw_storage_action =
        clamp_action(action.dhw_storage.value_or(0.0), -1.0, 1.0, id + ".dhw_storage", info);
    const double heater_capacity = data.dhw_heater->nominal_power * heater_eff * dt;
    tes_limits.max_in_kwh = std::max(heater_capacity - rec.dhw_demand, 0.0);
    tes_limits.max_out_kwh = rec.dhw_demand;
    tes = storage_step(*data.dhw_storage, b.dhw_storage, rec.dhw_storage_action, dt,
                       tes_limits);
  }

  // (3) PV and battery on the electric side
  rec.pv_generation = b.setup.pv ? pv_output(*data.pv, d.pv_per_kw[t]) : 0.0;
  if (b.setup.battery) {
    rec.battery_action =
        clamp_action(action.battery.value_or(0.0), -1.0, 1.0, id + ".battery", info);
  }
  StorageStepResult battery{b.battery, 0.0, 0.0, 0.0};

  const double dhw_electric = (rec.dhw_demand - tes.discharged_kwh_out) / heater_eff;
  const double tes_charge_electric = tes.charged_kwh_in / heater_eff;
  rec.hvac_electric_demand = hvac_electric;
  rec.heater_electric_demand = dhw_electric + tes_charge_electric;

  if (!grid_down) {
    if (b.setup.battery) {
      battery = storage_step(*data.battery, b.battery, rec.battery_action, dt);
    }
    rec.plug_served = rec.plug_demand;
    rec.hvac_electric_served = hvac_electric;
    rec.heater_electric_served = rec.heater_electric_demand;
    rec.cooling_delivered = cooling;
    rec.pv_used = rec.pv_generation;
    // (4) balance
    rec.net_electricity = hvac_electric + rec.heater_electric_served + rec.plug_demand +
                          battery.charged_kwh_in - battery.discharged_kwh_out -
                          rec.pv_generation;
    rec.grid_import = std::max(rec.net_electricity, 0.0);
    rec.grid_export = std::max(-rec.net_electricity, 0.0);
  } else {
    // (5) islanded: PV plus whatever the battery can give, served by priority
    // plug > DHW > cooling > storage charging. The agent's battery action is
    // overridden; the battery buffers the deficit or soaks up PV surplus.
    const double demand[4] = {rec.plug_demand, dhw_electric, hvac_electric,
                              tes_charge_electric};
    const double total = demand[0] + demand[1] + demand[2] + demand[3];
    double supply = rec.pv_generation;
    if (total <= rec.pv_generation) {
      if (b.setup.battery) {
        battery = storage_step(*data.battery, b.battery, 1.0, dt,
                               {rec.pv_generation - total, -1.0});
      }
      rec.pv_used = total + battery.charged_kwh_in;
      supply = total;
    } else {
      if (b.setup.battery) {
        battery = storage_step(*data.battery, b.battery, -1.0, dt,
                               {-1.0, total - rec.pv_generation});
      }
      rec.pv_used = rec.pv_generation;
      supply += battery.discharged_kwh_out;
    }
    double served[4];
    for (int k = 0; k < 4; ++k) {
      served[k] = std::min(demand[k], supply);
      supply -= served[k];
    }
    if (served[3] < demand[3]) {
      StorageLimits curtailed = tes_limits;
      curtailed.max_in_kwh = served[3] * heater_eff;
      tes = storage_step(*data.dhw_storage, b.dhw_storage, rec.dhw_storage_action, dt,
                         curtailed);
      const double tes_served = tes.charged_kwh_in / heater_eff;
      // Anything the store could not take back stays with the PV array.
      rec.pv_used -= served[3] - tes_served;
      served[3] = tes_served;
    }
    rec.plug_served = served[0];
    rec.heater_electric_served = served[1] + served[3];
    rec.hvac_electric_served = served[2];
    const double hvac_fraction = hvac_electric > 0.0 ? served[2] / hvac_electric : 1.0;
    rec.cooling_delivered = cooling * hvac_fraction;
    rec.unserved_cooling = cooling - rec.cooling_delivered;
    rec.unserved_electric = (demand[0] - served[0]) + (demand[1] - served[1]) +
                            (demand[2] - served[2]);
    rec.net_electricity = 0.0;
    rec.grid_import = 0.0;
    rec.grid_export = 0.0;
    info.unserved_energy += rec.unserved_electric;
    rec.unserved_dhw =
        std::max(rec.dhw_demand - tes.discharged_kwh_out - served[1] * heater_eff, 0.0);
  }
  rec.pv_curtailed = rec.pv_generation - rec.pv_used;
  rec.heater_thermal = rec.heater_electric_served * heater_eff;
  rec.dhw_served = rec.heater_thermal + tes.discharged_kwh_out - tes.charged_kwh_in;
  if (!grid_down) rec.unserved_dhw = 0.0;

  rec.dhw_storage_in = tes.charged_kwh_in;
  rec.dhw_storage_out = tes.discharged_kwh_out;
  rec.dhw_storage_loss = tes.standing_loss_kwh;
  rec.battery_in = battery.charged_kwh_in;
  rec.battery_out = battery.discharged_kwh_out;
  rec.battery_loss = battery.standing_loss_kwh;
  if (b.setup.dhw_storage) {
    b.dhw_storage = tes.state;
    rec.dhw_storage_soc = b.dhw_storage.soc / data.dhw_storage->capacity;
  }
  if (b.setup.battery) {
    b.battery = battery.state;
    rec.battery_soc = b.battery.soc / data.battery->capacity;
  }

  // (6) indoor temperature
  if (b.setup.heat_pump_control) {
    if (b.use_surrogate) {
      b.history.pop_front();
      b.history.push_back({b.indoor_temp, rec.cooling_delivered, d.outdoor_temp[t],
                           d.axis.hour_at(t), d.axis.day_of_week_at(t)});
      const std::vector<DynamicsSample> window(b.history.begin(), b.history.end());
      b.indoor_temp = predict_temperature(*data.surrogate, build_window(*data.surrogate, window));
    } else {
      b.indoor_temp = rc_step(data.thermal, b.indoor_temp, d.outdoor_temp[t],
                              rec.cooling_delivered, dt);
    }
  } else {
    // Ideal-load buildings track setpoint; curtailed cooling warms the zone
    // by the missing heat over its capacitance until supply returns.
    b.uncontrolled_excess = rec.unserved_cooling > 0.0
                                ? b.uncontrolled_excess +
                                      rec.unserved_cooling / data.thermal.thermal_capacitance
                                : 0.0;
    b.indoor_temp = rec.setpoint + b.uncontrolled_excess;
  }
  rec.indoor_temp = b.indoor_temp;
  b.last_net_electricity = rec.net_electricity;
  return rec;
}

StepOutcome Environment::step(const ActionVector& actions) {
  if (done()) fail(ErrorCode::kState, "step called on a finished episode");
  if (actions.size() != runtime_.size()) {
    fail(ErrorCode::kInvalidArgument, "expected actions for " +
                                          std::to_string(runtime_.size()) +
                                          " buildings, got " + std::to_string(actions.size()));
  }
  for (std::size_t i = 0; i < runtime_.size(); ++i) {
    const auto& setup = runtime_[i].setup;
    const auto reject = [&](const char* device) {
      fail(ErrorCode::kInvalidArgument, "action for " + std::string(device) + " in '" +
                                            setup.building_id + "', which is not controlled");
    };
    if (actions[i].battery && !setup.battery) reject("battery");
    if (actions[i].dhw_storage && !setup.dhw_storage) reject("dhw_storage");
    if (actions[i].heat_pump && !setup.heat_pump_control) reject("heat_pump");
  }

  StepOutcome outcome;
  const std::size_t t = cursor_;
  const bool grid_down = outage_.at(t);
  outcome.info.outage = grid_down;
  const double dt = dataset_->axis.step_hours();

  std::vector<BuildingStepRecord> records;
  records.reserve(runtime_.size());
  double district_power = 0.0;
  for (std::size_t i = 0; i < runtime_.size(); ++i) {
    records.push_back(settle(runtime_[i], actions[i], grid_down, outcome.info));
    district_power += records.back().net_electricity / dt;
  }

  trace_.steps.push_back(t);
  trace_.hours.push_back(dataset_->axis.hour_at(t));
  trace_.days_of_week.push_back(dataset_->axis.day_of_week_at(t));
  trace_.district_power.push_back(district_power);
  trace_.outage.push_back(grid_down ? 1 : 0);

  double building_sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    StepState state;
    state.net_electricity = rec.net_electricity;
    state.rate = rec.rate;
    state.carbon = rec.carbon;
    state.indoor_temp = rec.indoor_temp;
    state.setpoint = rec.setpoint;
    state.district_power = district_power;
    double r = reward(config_.reward, state);
    if (config_.futile_penalty.enabled && !grid_down) {
      const auto futile = [](double action, double in, double out) {
        return action != 0.0 && in == 0.0 && out == 0.0 ? std::abs(action) : 0.0;
      };
      double wasted = 0.0;
      if (runtime_[i].setup.battery) {
        wasted += futile(rec.battery_action, rec.battery_in, rec.battery_out);
      }
      if (runtime_[i].setup.dhw_storage) {
        wasted += futile(rec.dhw_storage_action, rec.dhw_storage_in, rec.dhw_storage_out);
      }
      r -= config_.futile_penalty.coefficient * wasted;
    }
    outcome.rewards.push_back(r);
    building_sum += r;
    trace_.buildings[i].push_back(rec);
  }
  if (config_.reward.kind == RewardKind::kAvgDailyPeak) {
    StepState district;
    district.district_power = district_power;
    outcome.district_reward = reward(config_.reward, district);
  } else {
    outcome.district_reward = building_sum;
  }

  ++cursor_;
  outcome.done = done();
  outcome.observations = observations();
  return outcome;
}

std::vector<ObservationVector> Environment::observations() const {
  std::vector<ObservationVector> out;
  for (std::size_t i = 0; i < runtime_.size(); ++i) {
    out.push_back(assemble_observations(i, config_.observations));
  }
  return out;
}

ObservationVector Environment::assemble_observations(
    std::size_t building, std::span<const ObservationName> active) const {
  const auto& d = *dataset_;
  const auto& b = runtime_.at(building);
  const auto& data = *b.data;
  // After the final step, exogenous reads stay on the last simulated step.
  const std::size_t t = std::min(cursor_, range_.end - 1);

  ObservationVector obs;
  for (auto name : active) {
    double v = 0.0;
    switch (name) {
      case ObservationName::kHour: v = d.axis.hour_at(t); break;
      case ObservationName::kDayOfWeek: v = d.axis.day_of_week_at(t); break;
      case ObservationName::kNetElectricityConsumption: v = b.last_net_electricity; break;
      case ObservationName::kElectricityRate: v = d.rate_at(t); break;
      case ObservationName::kCarbonIntensity: v = d.carbon[t]; break;
      case ObservationName::kSolarGeneration:
        v = b.setup.pv ? pv_output(*data.pv, d.pv_per_kw[t]) : 0.0;
        break;
      case ObservationName::kBatterySoc:
        if (!b.setup.battery) {
          fail(ErrorCode::kInvalidArgument, "building has no battery to observe");
        }
        v = b.battery.soc / data.battery->capacity;
        break;
      case ObservationName::kDhwSoc:
        if (!b.setup.dhw_storage) {
          fail(ErrorCode::kInvalidArgument, "building has no DHW storage to observe");
        }
        v = b.dhw_storage.soc / data.dhw_storage->capacity;
        break;
      case ObservationName::kOutdoorTemp: v = d.outdoor_temp[t]; break;
      case ObservationName::kIndoorTemp: v = b.indoor_temp; break;
      case ObservationName::kSetpoint: v = data.setpoint[t]; break;
      case ObservationName::kAbsTempDelta: v = std::abs(b.indoor_temp - data.setpoint[t]); break;
    }
    obs.names.push_back(name);
    obs.values.push_back(v);
  }
  return obs;
}

}  // namespace gridbench
