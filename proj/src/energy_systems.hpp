#pragma once

// Per-step device models. Every function here is pure: specs and states are
// values, and the caller owns whatever state persists between steps.

namespace gridbench {

enum class HeatPumpMode { kCooling, kHeating };

struct HeatPumpSpec {
  double nominal_power = 0.0;          // kW electric
  double technical_efficiency = 0.2;   // fraction of the Carnot limit
  double target_temp = 8.0;            // supply-side temperature, degC
  double cop_cap = 10.0;
  HeatPumpMode mode = HeatPumpMode::kCooling;
};

struct ElectricHeaterSpec {
  double nominal_power = 0.0;  // kW electric
  double efficiency = 0.9;
};

// Shared by the DHW thermal store and the battery. Energy quantities on the
// external side of the store (what flows in from, or out to, the building).
struct StorageSpec {
  double capacity = 0.0;             // kWh
  double max_charge_power = 0.0;     // kW
  double max_discharge_power = 0.0;  // kW
  double round_trip_efficiency = 1.0;
  double soc_min_fraction = 0.0;
  double loss_per_step = 0.0;

  double one_way_efficiency() const;
  double soc_floor() const { return soc_min_fraction * capacity; }
};

struct StorageState {
  double soc = 0.0;  // kWh
};

struct PvSpec {
  double nominal_power = 0.0;  // kW
};

void validate(const HeatPumpSpec& spec);
void validate(const ElectricHeaterSpec& spec);
void validate(const StorageSpec& spec);
void validate(const PvSpec& spec);

// Carnot COP scaled by technical efficiency, clamped to [1, cop_cap]. When the
// source is on the wrong side of the target (no lift needed) the cap applies.
double heat_pump_cop(const HeatPumpSpec& spec, double outdoor_temp);

struct DeviceEnergy {
  double electric_kwh = 0.0;
  double thermal_kwh = 0.0;
};

// `factor` is the COP for a heat pump or the efficiency for a heater.
// Throws kInvalidArgument for a power fraction outside [0, 1].
DeviceEnergy device_step(double nominal_power, double factor,
                         double power_fraction, double dt_hours);
DeviceEnergy device_step(const HeatPumpSpec& spec, double cop,
                         double power_fraction, double dt_hours);
DeviceEnergy device_step(const ElectricHeaterSpec& spec,
                         double power_fraction, double dt_hours);

// Extra caps imposed by the surroundings of a store, e.g. the heater that
// feeds a thermal store or the demand a discharge can offset.
struct StorageLimits {
  double max_in_kwh = -1.0;   // negative means unlimited
  double max_out_kwh = -1.0;
};

struct StorageStepResult {
  StorageState state;
  double charged_kwh_in = 0.0;
  double discharged_kwh_out = 0.0;
  double standing_loss_kwh = 0.0;
};

// Applies standing loss, then a charge (action > 0) or discharge (action < 0)
// of |action| * capacity, limited by power, headroom, the SOC floor and
// `limits`. Actions are clamped to [-1, 1].
StorageStepResult storage_step(const StorageSpec& spec,
                               const StorageState& state, double action,
                               double dt_hours,
                               const StorageLimits& limits = {});

// Largest energy the store could deliver this step, ignoring the action.
double storage_discharge_capability(const StorageSpec& spec,
                                    const StorageState& state,
                                    double dt_hours);

double pv_output(const PvSpec& spec, double per_kw);

}  // namespace gridbench
