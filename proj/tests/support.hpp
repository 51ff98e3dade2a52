#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "dataset.hpp"
#include "environment.hpp"
#include "error.hpp"
#include "trace.hpp"

namespace gbtest {

using namespace gridbench;

inline std::filesystem::path source_dir() { return GRIDBENCH_SOURCE_DIR; }
inline std::filesystem::path bundled_data() { return source_dir() / "data" / "synthetic"; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gridbench-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

inline void copy_dir(const std::filesystem::path& from, const std::filesystem::path& to) {
  std::filesystem::copy(from, to, std::filesystem::copy_options::recursive |
                                      std::filesystem::copy_options::overwrite_existing);
}

struct BuildingOptions {
  std::string id = "b1";
  double cooling = 1.0;
  double dhw = 0.5;
  double plug = 0.8;
  double setpoint = 24.0;
  bool heat_pump = true;
  bool dhw_storage = true;
  bool battery = true;
  bool pv = true;
  double pv_kw = 1.2;
};

inline BuildingDataset make_building(const BuildingOptions& o, std::size_t n,
                                     std::mt19937_64* rng) {
  std::uniform_real_distribution<double> jitter(0.0, 2.0);
  const auto series = [&](const std::string& name, double base, bool vary) {
    TimeSeries s;
    s.name = o.id + "." + name;
    for (std::size_t i = 0; i < n; ++i) {
      s.values.push_back(vary && rng ? base * jitter(*rng) : base);
    }
    return s;
  };
  BuildingDataset b;
  b.id = o.id;
  b.data_file = o.id + ".csv";
  b.cooling_load = series("cooling_load_kwh", o.heat_pump ? o.cooling : 0.0, true);
  b.dhw_load = series("dhw_load_kwh", o.dhw, true);
  b.plug_load = series("plug_load_kwh", o.plug, true);
  b.setpoint = series("setpoint_c", o.setpoint, false);
  if (o.heat_pump) b.heat_pump = HeatPumpSpec{2.3, 0.2, 8.0, 10.0, HeatPumpMode::kCooling};
  b.dhw_heater = ElectricHeaterSpec{3.7, 0.9};
  if (o.dhw_storage) b.dhw_storage = StorageSpec{1.7, 3.7, 3.7, 1.0, 0.0, 0.002};
  if (o.battery) b.battery = StorageSpec{4.0, 3.3, 3.3, 0.9, 0.2, 0.0};
  if (o.pv) b.pv = PvSpec{o.pv_kw};
  return b;
}

// Hourly district starting 2018-06-01 (a Friday). With an rng, loads, weather
// and PV vary per step.
inline std::shared_ptr<DistrictDataset> make_district(
    std::size_t days, const std::vector<BuildingOptions>& buildings,
    std::mt19937_64* rng = nullptr, SplitSpec split_spec = {}) {
  auto d = std::make_shared<DistrictDataset>();
  d->name = "test";
  d->axis.start = make_local_time(2018, 6, 1);
  d->axis.step_minutes = 60;
  d->steps_per_day = 24;
  d->n_steps = days * 24;
  d->tou = default_tou_schedule();
  if (split_spec.train_days + split_spec.test_days != static_cast<int>(days)) {
    split_spec.train_days = static_cast<int>(days - days / 2);
    split_spec.test_days = static_cast<int>(days / 2);
  }
  d->split_spec = split_spec;
  std::uniform_real_distribution<double> temp(24.0, 36.0), sun(0.0, 0.9), co2(0.3, 0.6);
  d->outdoor_temp.name = "outdoor_temp_c";
  d->pv_per_kw.name = "pv_per_kw_kwh";
  d->carbon.name = "kg_co2e_per_kwh";
  for (std::size_t t = 0; t < d->n_steps; ++t) {
    const int hour = static_cast<int>(t % 24);
    const double daylight = hour >= 7 && hour < 20 ? 0.5 : 0.0;
    d->outdoor_temp.values.push_back(rng ? temp(*rng) : 30.0);
    d->pv_per_kw.values.push_back(rng ? (daylight > 0 ? sun(*rng) : 0.0) : daylight);
    d->carbon.values.push_back(rng ? co2(*rng) : 0.45);
  }
  for (const auto& b : buildings) d->buildings.push_back(make_building(b, d->n_steps, rng));
  validate(*d);
  return d;
}

inline EnvironmentConfig make_config(const DistrictDataset& d, bool pv, bool dhw, bool battery,
                                     bool heat_pump, RewardKind reward = RewardKind::kCost) {
  EnvironmentConfig c;
  for (const auto& b : d.buildings) {
    BuildingSetup s;
    s.building_id = b.id;
    s.pv = pv && b.pv.has_value();
    s.dhw_storage = dhw && b.dhw_storage.has_value();
    s.battery = battery && b.battery.has_value();
    s.heat_pump_control = heat_pump && b.heat_pump.has_value();
    c.buildings.push_back(s);
  }
  c.observations = {ObservationName::kHour, ObservationName::kDayOfWeek,
                    ObservationName::kNetElectricityConsumption};
  c.reward.kind = reward;
  return c;
}

// Electric-bus residual: sources minus sinks for one settled step.
inline double electric_residual(const BuildingStepRecord& r) {
  const double sources = r.grid_import + r.pv_used + r.battery_out;
  const double sinks = r.plug_served + r.hvac_electric_served + r.heater_electric_served +
                       r.battery_in + r.grid_export;
  return sources - sinks;
}

// Trace with random signed consumption, prices, intensities and temperatures.
inline EpisodeTrace random_trace(std::mt19937_64& rng, std::size_t steps, std::size_t buildings) {
  std::uniform_real_distribution<double> e(-3.0, 6.0), rate(0.02, 0.08), co2(0.2, 0.7),
      temp(18.0, 30.0), spt(22.0, 26.0), unserved(0.0, 1.0);
  EpisodeTrace tr;
  tr.steps_per_day = 24;
  tr.step_hours = 1.0;
  tr.buildings.resize(buildings);
  for (std::size_t b = 0; b < buildings; ++b) tr.building_ids.push_back("b" + std::to_string(b));
  for (std::size_t t = 0; t < steps; ++t) {
    tr.steps.push_back(t);
    tr.hours.push_back(static_cast<int>(t % 24));
    tr.days_of_week.push_back(static_cast<int>(1 + (t / 24) % 7));
    tr.outage.push_back(0);
    double p = 0.0;
    for (std::size_t b = 0; b < buildings; ++b) {
      BuildingStepRecord r;
      r.net_electricity = e(rng);
      r.rate = rate(rng);
      r.carbon = co2(rng);
      r.indoor_temp = temp(rng);
      r.setpoint = spt(rng);
      r.unserved_electric = t % 50 == 0 ? unserved(rng) : 0.0;
      p += r.net_electricity;
      tr.buildings[b].push_back(r);
    }
    tr.district_power.push_back(p);
  }
  return tr;
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

template <typename F>
std::string error_message_of(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace gbtest
