#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "trace.hpp"

namespace gridbench {

enum class Objective {
  kCost,
  kEmissions,
  kDiscomfort,
  kConsumption,
  kAvgDailyPeak,
  kUnservedEnergy,  // outage runs only; not one of the five benchmark KPIs
};

std::string to_string(Objective objective);

// Plain-array forms of the KPI sums; the trace-level kpi() delegates here.
double cost_kpi(std::span<const double> net_electricity, std::span<const double> rate);
double emissions_kpi(std::span<const double> net_electricity,
                     std::span<const double> carbon);
double discomfort_kpi(std::span<const double> indoor, std::span<const double> setpoint);
double consumption_kpi(std::span<const double> net_electricity);
// sum over days of the daily max of P, times h / n. n must be a multiple of h.
double avg_daily_peak_kpi(std::span<const double> district_power,
                          std::size_t steps_per_day);
std::vector<double> daily_peaks(std::span<const double> district_power,
                                std::size_t steps_per_day);

// `range` indexes trace positions. With no building given, building-level
// objectives are summed across the district.
double kpi(Objective objective, const EpisodeTrace& trace, StepRange range,
           std::optional<std::size_t> building = std::nullopt);

enum class RewardKind { kCost, kEmissions, kDiscomfortConsumption, kAvgDailyPeak };

struct RewardSpec {
  RewardKind kind = RewardKind::kCost;
  double m = 1.0;  // over-cooling multiplier, discomfort_consumption only
};

std::string to_string(RewardKind kind);
void validate(const RewardSpec& spec);

// The symbols a reward may read; each kind throws if one it needs is absent.
struct StepState {
  std::optional<double> net_electricity;  // e(t), kWh
  std::optional<double> rate;             // R(t)
  std::optional<double> carbon;           // G(t)
  std::optional<double> indoor_temp;      // T(t)
  std::optional<double> setpoint;         // T_spt(t)
  std::optional<double> district_power;   // P(t), kW
};

double reward(const RewardSpec& spec, const StepState& state);

struct BuildingKpis {
  std::string id;
  double cost = 0.0;
  double emissions = 0.0;
  double discomfort = 0.0;
  double consumption = 0.0;
  double unserved_energy = 0.0;
};

struct DistrictKpis {
  double cost = 0.0;
  double emissions = 0.0;
  double discomfort = 0.0;
  double consumption = 0.0;
  double avg_daily_peak = 0.0;
  double unserved_energy = 0.0;
};

struct BuildingDeltas {
  std::string id;
  std::optional<double> cost, emissions, discomfort, consumption, unserved_energy;
};

struct DistrictDeltas {
  std::optional<double> cost, emissions, discomfort, consumption, avg_daily_peak,
      unserved_energy;
};

struct KpiComparison {
  std::string baseline;
  std::vector<BuildingDeltas> buildings;
  // Present only when both reports cover the same building set.
  std::optional<DistrictDeltas> district;
};

struct KpiReport {
  std::string label;
  StepRange range;  // absolute dataset steps
  std::vector<BuildingKpis> buildings;
  DistrictKpis district;
  std::vector<double> daily_peaks;  // kW, one per day of the range
  std::vector<KpiComparison> comparisons;

  const BuildingKpis* find_building(const std::string& id) const;
};

KpiReport compute_report(const std::string& label, const EpisodeTrace& trace,
                         const TariffOptions& tariff = {});

// (value - baseline) / baseline * 100; nullopt when the baseline is zero.
std::optional<double> percent_delta(double value, double baseline);

KpiComparison compare(const KpiReport& report, const KpiReport& baseline);

// Mean and population standard deviation of |T - T_spt| split by side.
struct TemperatureDeviation {
  double over_cool_mean = 0.0, over_cool_std = 0.0;
  double under_cool_mean = 0.0, under_cool_std = 0.0;
  std::size_t over_cool_steps = 0, under_cool_steps = 0;
};

TemperatureDeviation temperature_deviation(const EpisodeTrace& trace,
                                           std::size_t building);

std::string report_json(const KpiReport& report);
std::string report_text(const KpiReport& report);
std::string daily_peaks_csv(const KpiReport& report, const TimeAxis& axis,
                            std::size_t steps_per_day);

}  // namespace gridbench
