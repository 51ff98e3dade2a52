#include "energy_systems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace gridbench {

namespace {

constexpr double kKelvinOffset = 273.15;

void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kValidation, message);
}

double cap_or_unlimited(double limit) {
  return limit < 0.0 ? INFINITY : limit;
}

}  // namespace

double StorageSpec::one_way_efficiency() const {
  return std::sqrt(round_trip_efficiency);
}

void validate(const HeatPumpSpec& spec) {
  require(spec.nominal_power > 0.0, "heat pump nominal_power must be > 0");
  require(spec.technical_efficiency > 0.0 && spec.technical_efficiency <= 1.0,
          "heat pump technical_efficiency must be in (0, 1]");
  require(spec.cop_cap >= 1.0, "heat pump cop_cap must be >= 1");
  require(std::isfinite(spec.target_temp), "heat pump target_temp must be finite");
}

void validate(const ElectricHeaterSpec& spec) {
  require(spec.nominal_power > 0.0, "heater nominal_power must be > 0");
  require(spec.efficiency > 0.0 && spec.efficiency <= 1.0,
          "heater efficiency must be in (0, 1]");
}

void validate(const StorageSpec& spec) {
  require(spec.capacity > 0.0, "storage capacity must be > 0");
  require(spec.max_charge_power >= 0.0 && spec.max_discharge_power >= 0.0,
          "storage power limits must be >= 0");
  require(spec.round_trip_efficiency > 0.0 && spec.round_trip_efficiency <= 1.0,
          "storage round_trip_efficiency must be in (0, 1]");
  require(spec.soc_min_fraction >= 0.0 && spec.soc_min_fraction < 1.0,
          "storage soc_min_fraction must be in [0, 1)");
  require(spec.loss_per_step >= 0.0 && spec.loss_per_step < 1.0,
          "storage loss_per_step must be in [0, 1)");
}

void validate(const PvSpec& spec) {
  require(spec.nominal_power >= 0.0, "pv nominal_power must be >= 0");
}

double heat_pump_cop(const HeatPumpSpec& spec, double outdoor_temp) {
  const double target_k = spec.target_temp + kKelvinOffset;
  const double outdoor_k = outdoor_temp + kKelvinOffset;
  // Lift is positive only when the pump works against the outdoor gradient.
  const double lift = spec.mode == HeatPumpMode::kCooling
                          ? outdoor_k - target_k
                          : target_k - outdoor_k;
  if (lift <= 0.0) return spec.cop_cap;
  const double cop = spec.technical_efficiency * target_k / lift;
  return std::clamp(cop, 1.0, spec.cop_cap);
}

DeviceEnergy device_step(double nominal_power, double factor,
                         double power_fraction, double dt_hours) {
  if (!(power_fraction >= 0.0 && power_fraction <= 1.0)) {
    fail(ErrorCode::kInvalidArgument,
         "power fraction " + std::to_string(power_fraction) +
             " outside [0, 1]");
  }
  DeviceEnergy out;
  out.electric_kwh = power_fraction * nominal_power * dt_hours;
  out.thermal_kwh = out.electric_kwh * factor;
  return out;
}

DeviceEnergy device_step(const HeatPumpSpec& spec, double cop,
                         double power_fraction, double dt_hours) {
  return device_step(spec.nominal_power, cop, power_fraction, dt_hours);
}

DeviceEnergy device_step(const ElectricHeaterSpec& spec,
                         double power_fraction, double dt_hours) {
  return device_step(spec.nominal_power, spec.efficiency, power_fraction,
                     dt_hours);
}

StorageStepResult storage_step(const StorageSpec& spec,
                               const StorageState& state, double action,
                               double dt_hours, const StorageLimits& limits) {
  action = std::clamp(action, -1.0, 1.0);
  const double floor = spec.soc_floor();
  const double eff = spec.one_way_efficiency();

  StorageStepResult result;
  // Standing loss never pushes a store below its floor.
  double soc = state.soc * (1.0 - spec.loss_per_step);
  if (state.soc >= floor) soc = std::max(soc, floor);
  result.standing_loss_kwh = state.soc - soc;

  if (action > 0.0) {
    // Headroom is taken against the pre-loss SOC so a full store stays a
    // no-op for charge requests.
    const double headroom_in = std::max(spec.capacity - state.soc, 0.0) / eff;
    const double in = std::min({action * spec.capacity,
                                spec.max_charge_power * dt_hours, headroom_in,
                                cap_or_unlimited(limits.max_in_kwh)});
    result.charged_kwh_in = std::max(in, 0.0);
    soc = std::min(soc + result.charged_kwh_in * eff, spec.capacity);
  } else if (action < 0.0) {
    const double available_out = std::max(soc - floor, 0.0) * eff;
    const double out = std::min({-action * spec.capacity,
                                 spec.max_discharge_power * dt_hours,
                                 available_out,
                                 cap_or_unlimited(limits.max_out_kwh)});
    result.discharged_kwh_out = std::max(out, 0.0);
    soc = std::max(soc - result.discharged_kwh_out / eff, floor);
  }
  result.state.soc = soc;
  return result;
}

double storage_discharge_capability(const StorageSpec& spec,
                                    const StorageState& state,
                                    double dt_hours) {
  return storage_step(spec, state, -1.0, dt_hours).discharged_kwh_out;
}

double pv_output(const PvSpec& spec, double per_kw) {
  return spec.nominal_power * per_kw;
}

}  // namespace gridbench
