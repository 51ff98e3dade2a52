#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"

namespace gridbench {

namespace {

using Json = nlohmann::ordered_json;

void check_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    fail(ErrorCode::kInvalidArgument, "KPI inputs differ in length (" +
                                          std::to_string(a) + " vs " +
                                          std::to_string(b) + ")");
  }
}

double require_symbol(const std::optional<double>& v, const char* symbol,
                      RewardKind kind) {
  if (!v) {
    fail(ErrorCode::kInvalidArgument, std::string("reward ") + to_string(kind) +
                                          " needs " + symbol);
  }
  return *v;
}

std::vector<double> gather(const EpisodeTrace& trace, std::size_t b, StepRange range,
                           double BuildingStepRecord::*field) {
  std::vector<double> out;
  out.reserve(range.size());
  for (std::size_t t = range.begin; t < range.end; ++t) {
    out.push_back(trace.buildings[b][t].*field);
  }
  return out;
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string fixed(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string delta_text(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.2f%%", *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string to_string(Objective objective) {
  switch (objective) {
    case Objective::kCost: return "cost";
    case Objective::kEmissions: return "emissions";
    case Objective::kDiscomfort: return "discomfort";
    case Objective::kConsumption: return "consumption";
    case Objective::kAvgDailyPeak: return "avg_daily_peak";
    case Objective::kUnservedEnergy: return "unserved_energy";
  }
  return "unknown";
}

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::kCost: return "cost";
    case RewardKind::kEmissions: return "emissions";
    case RewardKind::kDiscomfortConsumption: return "discomfort_consumption";
    case RewardKind::kAvgDailyPeak: return "avg_daily_peak";
  }
  return "unknown";
}

double cost_kpi(std::span<const double> e, std::span<const double> rate) {
  check_same_length(e.size(), rate.size());
  double total = 0.0;
  for (std::size_t t = 0; t < e.size(); ++t) total += std::max(e[t], 0.0) * rate[t];
  return total;
}

double emissions_kpi(std::span<const double> e, std::span<const double> carbon) {
  check_same_length(e.size(), carbon.size());
  double total = 0.0;
  for (std::size_t t = 0; t < e.size(); ++t) total += std::max(e[t], 0.0) * carbon[t];
  return total;
}

double discomfort_kpi(std::span<const double> indoor, std::span<const double> setpoint) {
  check_same_length(indoor.size(), setpoint.size());
  double total = 0.0;
  for (std::size_t t = 0; t < indoor.size(); ++t) total += std::abs(indoor[t] - setpoint[t]);
  return total;
}

double consumption_kpi(std::span<const double> e) {
  double total = 0.0;
  for (double v : e) total += std::max(v, 0.0);
  return total;
}

std::vector<double> daily_peaks(std::span<const double> power, std::size_t steps_per_day) {
  if (steps_per_day == 0 || power.empty() || power.size() % steps_per_day != 0) {
    fail(ErrorCode::kInvalidArgument,
         "average daily peak needs whole days: " + std::to_string(power.size()) +
             " steps with " + std::to_string(steps_per_day) + " steps per day");
  }
  std::vector<double> peaks;
  for (std::size_t d = 0; d < power.size() / steps_per_day; ++d) {
    const auto day = power.subspan(d * steps_per_day, steps_per_day);
    peaks.push_back(*std::max_element(day.begin(), day.end()));
  }
  return peaks;
}

double avg_daily_peak_kpi(std::span<const double> power, std::size_t steps_per_day) {
  const auto peaks = daily_peaks(power, steps_per_day);
  double total = 0.0;
  for (double p : peaks) total += p;
  return total * static_cast<double>(steps_per_day) / static_cast<double>(power.size());
}

double kpi(Objective objective, const EpisodeTrace& trace, StepRange range,
           std::optional<std::size_t> building) {
  if (range.end > trace.size() || range.begin > range.end) {
    fail(ErrorCode::kInvalidArgument, "KPI range outside trace");
  }
  if (objective == Objective::kAvgDailyPeak) {
    const std::span<const double> power(trace.district_power);
    return avg_daily_peak_kpi(power.subspan(range.begin, range.size()),
                              trace.steps_per_day);
  }
  std::vector<std::size_t> targets;
  if (building) {
    targets.push_back(*building);
  } else {
    for (std::size_t b = 0; b < trace.building_ids.size(); ++b) targets.push_back(b);
  }
  double total = 0.0;
  for (std::size_t b : targets) {
    if (b >= trace.building_ids.size()) {
      fail(ErrorCode::kInvalidArgument, "building index out of range");
    }
    const auto e = gather(trace, b, range, &BuildingStepRecord::net_electricity);
    switch (objective) {
      case Objective::kCost:
        total += cost_kpi(e, gather(trace, b, range, &BuildingStepRecord::rate));
        break;
      case Objective::kEmissions:
        total += emissions_kpi(e, gather(trace, b, range, &BuildingStepRecord::carbon));
        break;
      case Objective::kDiscomfort:
        total += discomfort_kpi(gather(trace, b, range, &BuildingStepRecord::indoor_temp),
                                gather(trace, b, range, &BuildingStepRecord::setpoint));
        break;
      case Objective::kConsumption:
        total += consumption_kpi(e);
        break;
      case Objective::kUnservedEnergy:
        for (double v : gather(trace, b, range, &BuildingStepRecord::unserved_electric)) {
          total += std::max(v, 0.0);
        }
        break;
      case Objective::kAvgDailyPeak:
        break;
    }
  }
  return total;
}

void validate(const RewardSpec& spec) {
  if (spec.kind == RewardKind::kDiscomfortConsumption && !(spec.m >= 1.0)) {
    fail(ErrorCode::kValidation, "discomfort_consumption multiplier m must be >= 1");
  }
}

double reward(const RewardSpec& spec, const StepState& s) {
  switch (spec.kind) {
    case RewardKind::kCost: {
      const double e = require_symbol(s.net_electricity, "e(t)", spec.kind);
      return -std::max(e, 0.0) * require_symbol(s.rate, "R(t)", spec.kind);
    }
    case RewardKind::kEmissions: {
      const double e = require_symbol(s.net_electricity, "e(t)", spec.kind);
      return -std::max(e, 0.0) * require_symbol(s.carbon, "G(t)", spec.kind);
    }
    case RewardKind::kDiscomfortConsumption: {
      const double t = require_symbol(s.indoor_temp, "T(t)", spec.kind);
      const double spt = require_symbol(s.setpoint, "T_spt(t)", spec.kind);
      const double delta = std::abs(t - spt);
      // Cooling season: below setpoint means energy spent over-cooling.
      return t < spt ? -spec.m * delta : -delta;
    }
    case RewardKind::kAvgDailyPeak:
      return -std::max(require_symbol(s.district_power, "P(t)", spec.kind), 0.0);
  }
  return 0.0;
}

const BuildingKpis* KpiReport::find_building(const std::string& id) const {
  for (const auto& b : buildings) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

KpiReport compute_report(const std::string& label, const EpisodeTrace& trace,
                         const TariffOptions& tariff) {
  KpiReport report;
  report.label = label;
  const StepRange all{0, trace.size()};
  if (trace.size() > 0) report.range = {trace.steps.front(), trace.steps.back() + 1};
  const double days = static_cast<double>(trace.size()) /
                      static_cast<double>(std::max<std::size_t>(trace.steps_per_day, 1));
  for (std::size_t b = 0; b < trace.building_ids.size(); ++b) {
    BuildingKpis k;
    k.id = trace.building_ids[b];
    k.cost = kpi(Objective::kCost, trace, all, b);
    if (tariff.include_fixed_charges) k.cost += tariff.fixed_charge_per_day * days;
    k.emissions = kpi(Objective::kEmissions, trace, all, b);
    k.discomfort = kpi(Objective::kDiscomfort, trace, all, b);
    k.consumption = kpi(Objective::kConsumption, trace, all, b);
    k.unserved_energy = kpi(Objective::kUnservedEnergy, trace, all, b);
    report.district.cost += k.cost;
    report.district.emissions += k.emissions;
    report.district.discomfort += k.discomfort;
    report.district.consumption += k.consumption;
    report.district.unserved_energy += k.unserved_energy;
    report.buildings.push_back(k);
  }
  report.daily_peaks = daily_peaks(trace.district_power, trace.steps_per_day);
  report.district.avg_daily_peak = kpi(Objective::kAvgDailyPeak, trace, all);
  return report;
}

std::optional<double> percent_delta(double value, double baseline) {
  if (baseline == 0.0) return std::nullopt;
  return (value - baseline) / baseline * 100.0;
}

KpiComparison compare(const KpiReport& report, const KpiReport& baseline) {
  if (!(report.range == baseline.range)) {
    fail(ErrorCode::kInvalidArgument,
         "cannot compare '" + report.label + "' with '" + baseline.label +
             "': evaluation ranges differ");
  }
  KpiComparison out;
  out.baseline = baseline.label;
  std::set<std::string> ids, base_ids;
  for (const auto& b : report.buildings) {
    ids.insert(b.id);
    const BuildingKpis* base = baseline.find_building(b.id);
    if (base == nullptr) continue;
    BuildingDeltas d;
    d.id = b.id;
    d.cost = percent_delta(b.cost, base->cost);
    d.emissions = percent_delta(b.emissions, base->emissions);
    d.discomfort = percent_delta(b.discomfort, base->discomfort);
    d.consumption = percent_delta(b.consumption, base->consumption);
    d.unserved_energy = percent_delta(b.unserved_energy, base->unserved_energy);
    out.buildings.push_back(d);
  }
  for (const auto& b : baseline.buildings) base_ids.insert(b.id);
  if (ids == base_ids) {
    DistrictDeltas d;
    d.cost = percent_delta(report.district.cost, baseline.district.cost);
    d.emissions = percent_delta(report.district.emissions, baseline.district.emissions);
    d.discomfort = percent_delta(report.district.discomfort, baseline.district.discomfort);
    d.consumption = percent_delta(report.district.consumption, baseline.district.consumption);
    d.avg_daily_peak =
        percent_delta(report.district.avg_daily_peak, baseline.district.avg_daily_peak);
    d.unserved_energy =
        percent_delta(report.district.unserved_energy, baseline.district.unserved_energy);
    out.district = d;
  }
  return out;
}

TemperatureDeviation temperature_deviation(const EpisodeTrace& trace, std::size_t building) {
  std::vector<double> over, under;
  for (const auto& rec : trace.buildings.at(building)) {
    const double delta = rec.indoor_temp - rec.setpoint;
    if (delta < 0.0) over.push_back(-delta);
    if (delta > 0.0) under.push_back(delta);
  }
  const auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(v.size()));
  };
  TemperatureDeviation out;
  stats(over, out.over_cool_mean, out.over_cool_std);
  stats(under, out.under_cool_mean, out.under_cool_std);
  out.over_cool_steps = over.size();
  out.under_cool_steps = under.size();
  return out;
}

std::string report_json(const KpiReport& report) {
  Json doc;
  doc["label"] = report.label;
  doc["range"] = {{"begin", report.range.begin}, {"end", report.range.end}};
  Json buildings = Json::array();
  for (const auto& b : report.buildings) {
    buildings.push_back({{"id", b.id},
                         {"cost", b.cost},
                         {"emissions", b.emissions},
                         {"discomfort", b.discomfort},
                         {"consumption", b.consumption},
                         {"unserved_energy", b.unserved_energy}});
  }
  doc["buildings"] = buildings;
  doc["district"] = {{"cost", report.district.cost},
                     {"emissions", report.district.emissions},
                     {"discomfort", report.district.discomfort},
                     {"consumption", report.district.consumption},
                     {"avg_daily_peak", report.district.avg_daily_peak},
                     {"unserved_energy", report.district.unserved_energy}};
  doc["daily_peaks"] = report.daily_peaks;
  Json comparisons = Json::array();
  for (const auto& c : report.comparisons) {
    Json entry;
    entry["baseline"] = c.baseline;
    Json bd = Json::array();
    for (const auto& d : c.buildings) {
      bd.push_back({{"id", d.id},
                    {"cost_pct", optional_number(d.cost)},
                    {"emissions_pct", optional_number(d.emissions)},
                    {"discomfort_pct", optional_number(d.discomfort)},
                    {"consumption_pct", optional_number(d.consumption)},
                    {"unserved_energy_pct", optional_number(d.unserved_energy)}});
    }
    entry["buildings"] = bd;
    if (c.district) {
      entry["district"] = {{"cost_pct", optional_number(c.district->cost)},
                           {"emissions_pct", optional_number(c.district->emissions)},
                           {"discomfort_pct", optional_number(c.district->discomfort)},
                           {"consumption_pct", optional_number(c.district->consumption)},
                           {"avg_daily_peak_pct", optional_number(c.district->avg_daily_peak)},
                           {"unserved_energy_pct", optional_number(c.district->unserved_energy)}};
    } else {
      entry["district"] = nullptr;
    }
    comparisons.push_back(entry);
  }
  doc["comparisons"] = comparisons;
  doc["notes"] = {{"unserved_energy", "resiliency extension, not a benchmark objective"}};
  return doc.dump(2) + "\n";
}

std::string report_text(const KpiReport& report) {
  std::string out = "run: " + report.label + "  steps [" + std::to_string(report.range.begin) +
                    ", " + std::to_string(report.range.end) + ")\n\n";
  out += pad_right("building", 10) + pad("cost $", 12) + pad("kgCO2e", 12) +
         pad("discomf Ch", 12) + pad("kWh", 12) + pad("unserved", 12) + "\n";
  for (const auto& b : report.buildings) {
    out += pad_right(b.id, 10) + pad(fixed(b.cost), 12) + pad(fixed(b.emissions), 12) +
           pad(fixed(b.discomfort), 12) + pad(fixed(b.consumption), 12) +
           pad(fixed(b.unserved_energy), 12) + "\n";
  }
  const auto& d = report.district;
  out += pad_right("district", 10) + pad(fixed(d.cost), 12) + pad(fixed(d.emissions), 12) +
         pad(fixed(d.discomfort), 12) + pad(fixed(d.consumption), 12) +
         pad(fixed(d.unserved_energy), 12) + "\n";
  out += "\navg daily peak: " + fixed(d.avg_daily_peak) + " kW\n";
  for (const auto& c : report.comparisons) {
    out += "\nvs " + c.baseline + "\n";
    out += pad_right("building", 10) + pad("cost", 10) + pad("emissions", 11) +
           pad("discomfort", 11) + pad("consumption", 12) + pad("peak", 10) + "\n";
    for (const auto& bd : c.buildings) {
      out += pad_right(bd.id, 10) + pad(delta_text(bd.cost), 10) +
             pad(delta_text(bd.emissions), 11) + pad(delta_text(bd.discomfort), 11) +
             pad(delta_text(bd.consumption), 12) + pad("", 10) + "\n";
    }
    if (c.district) {
      out += pad_right("district", 10) + pad(delta_text(c.district->cost), 10) +
             pad(delta_text(c.district->emissions), 11) +
             pad(delta_text(c.district->discomfort), 11) +
             pad(delta_text(c.district->consumption), 12) +
             pad(delta_text(c.district->avg_daily_peak), 10) + "\n";
    }
  }
  return out;
}

std::string daily_peaks_csv(const KpiReport& report, const TimeAxis& axis,
                            std::size_t steps_per_day) {
  std::string out = "day,date,peak_kw\n";
  for (std::size_t d = 0; d < report.daily_peaks.size(); ++d) {
    const std::string stamp =
        format_timestamp(axis.time_at(report.range.begin + d * steps_per_day));
    out += std::to_string(d) + "," + stamp.substr(0, 10) + "," +
           format_double(report.daily_peaks[d]) + "\n";
  }
  return out;
}

}  // namespace gridbench
