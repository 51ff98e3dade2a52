#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "energy_systems.hpp"
#include "outage.hpp"
#include "thermal_dynamics.hpp"

namespace gridbench {

using LocalMinutes = std::chrono::local_time<std::chrono::minutes>;

// Shared calendar of every series in a district. Timestamps are implied by
// (start, step), so a series cannot have gaps.
struct TimeAxis {
  LocalMinutes start{};
  int step_minutes = 60;

  double step_hours() const { return step_minutes / 60.0; }
  LocalMinutes time_at(std::size_t step) const;
  int hour_at(std::size_t step) const;
  // ISO numbering: Monday = 1 ... Sunday = 7.
  int day_of_week_at(std::size_t step) const;
  bool is_weekend_at(std::size_t step) const;
};

std::string format_timestamp(LocalMinutes t);
LocalMinutes make_local_time(int year, unsigned month, unsigned day, int hour = 0,
                             int minute = 0);

struct TimeSeries {
  std::string name;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

enum class DayType { kWeekday, kWeekend };

struct TouBand {
  int start_hour = 0;  // inclusive
  int end_hour = 0;    // exclusive; a band with end <= start wraps midnight
  double rate = 0.0;   // $/kWh
  std::string tier;

  bool contains(int hour) const;
};

struct TouSchedule {
  std::vector<TouBand> weekday_bands;
  double weekend_rate = 0.0;
};

// Austin Energy 2018 TOU pilot rates.
TouSchedule default_tou_schedule();

// Every weekday hour must fall in exactly one band and all rates be positive.
void validate(const TouSchedule& schedule);

double tou_rate(const TouSchedule& schedule, DayType day_type, int hour);

struct SplitSpec {
  int train_days = 13;
  int test_days = 17;
};

struct StepRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - begin; }
  bool operator==(const StepRange&) const = default;
};

struct SplitRanges {
  StepRange train;
  StepRange test;
};

SplitRanges split(std::size_t n_steps, std::size_t steps_per_day,
                  const SplitSpec& spec);

struct BuildingDataset {
  std::string id;
  std::filesystem::path data_file;  // relative to the manifest directory
  TimeSeries cooling_load;  // kWh thermal per step
  TimeSeries dhw_load;      // kWh thermal per step
  TimeSeries plug_load;     // kWh electric per step
  TimeSeries setpoint;      // degC

  std::optional<HeatPumpSpec> heat_pump;
  std::optional<ElectricHeaterSpec> dhw_heater;
  std::optional<StorageSpec> dhw_storage;
  std::optional<StorageSpec> battery;
  std::optional<PvSpec> pv;
  RcModelParams thermal;
  std::filesystem::path surrogate_file;
  std::shared_ptr<const RecurrentSurrogate> surrogate;
};

struct TariffOptions {
  // Fixed charges stay out of cost KPIs unless explicitly enabled.
  bool include_fixed_charges = false;
  double fixed_charge_per_day = 0.0;
};

struct OutageSource {
  OutageSettings settings;
  std::filesystem::path static_file;
};

struct DistrictDataset {
  std::string name;
  TimeAxis axis;
  std::size_t steps_per_day = 24;
  std::size_t n_steps = 0;

  TimeSeries outdoor_temp;  // degC
  TimeSeries pv_per_kw;     // kWh per kW installed, per step
  TimeSeries carbon;        // kgCO2e/kWh
  std::optional<TimeSeries> price;  // $/kWh, overrides the TOU schedule
  TouSchedule tou;
  TariffOptions tariff;
  SplitSpec split_spec;
  OutageSource outage;
  std::vector<BuildingDataset> buildings;

  std::filesystem::path weather_file = "weather.csv";
  std::filesystem::path carbon_file = "carbon.csv";
  std::filesystem::path price_file;

  double rate_at(std::size_t step) const;
  const BuildingDataset* find_building(const std::string& id) const;
  SplitRanges ranges() const { return split(n_steps, steps_per_day, split_spec); }
};

// Re-checks every series invariant; load_district calls this before returning.
void validate(const DistrictDataset& district);

DistrictDataset load_district(const std::filesystem::path& directory);

// Writes manifest and CSVs so that load_district(directory) reproduces the
// dataset value for value.
void save_district(const DistrictDataset& district,
                   const std::filesystem::path& directory);

}  // namespace gridbench
