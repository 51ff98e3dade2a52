#include "dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "csv.hpp"
#include "error.hpp"

namespace gridbench {

namespace fs = std::filesystem;
using namespace std::chrono;

namespace {

constexpr int kManifestVersion = 1;
constexpr const char* kManifestName = "district.toml";

// ---------------------------------------------------------------- calendar

LocalMinutes parse_timestamp(std::string_view text) {
  // YYYY-MM-DD[(T| )HH:MM[:SS]]
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  char sep = 0;
  std::istringstream in{std::string(text)};
  char dash1 = 0, dash2 = 0, colon = 0;
  in >> y >> dash1 >> mo >> dash2 >> d;
  if (!in || dash1 != '-' || dash2 != '-') {
    fail(ErrorCode::kParse, "bad timestamp '" + std::string(text) + "'");
  }
  if (in >> sep) {
    in >> h >> colon >> mi;
    if (!in || (sep != 'T' && sep != ' ') || colon != ':') {
      fail(ErrorCode::kParse, "bad timestamp '" + std::string(text) + "'");
    }
  }
  return make_local_time(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h, mi);
}

// ---------------------------------------------------------------- manifest

[[noreturn]] void manifest_error(const std::string& what) {
  fail(ErrorCode::kValidation, std::string(kManifestName) + ": " + what);
}

double get_number(const toml::table& t, std::string_view key,
                  std::optional<double> fallback, const std::string& context) {
  const toml::node* node = t.get(key);
  if (node == nullptr) {
    if (fallback) return *fallback;
    manifest_error(context + "." + std::string(key) + " is required");
  }
  if (auto v = node->value<double>()) return *v;
  manifest_error(context + "." + std::string(key) + " must be a number");
}

long long get_integer(const toml::table& t, std::string_view key,
                      std::optional<long long> fallback, const std::string& context) {
  const toml::node* node = t.get(key);
  if (node == nullptr) {
    if (fallback) return *fallback;
    manifest_error(context + "." + std::string(key) + " is required");
  }
  if (auto v = node->value<int64_t>()) return *v;
  manifest_error(context + "." + std::string(key) + " must be an integer");
}

std::string get_string(const toml::table& t, std::string_view key,
                       std::optional<std::string> fallback,
                       const std::string& context) {
  const toml::node* node = t.get(key);
  if (node == nullptr) {
    if (fallback) return *fallback;
    manifest_error(context + "." + std::string(key) + " is required");
  }
  if (auto v = node->value<std::string>()) return *v;
  manifest_error(context + "." + std::string(key) + " must be a string");
}

bool get_bool(const toml::table& t, std::string_view key, bool fallback,
              const std::string& context) {
  const toml::node* node = t.get(key);
  if (node == nullptr) return fallback;
  if (auto v = node->value<bool>()) return *v;
  manifest_error(context + "." + std::string(key) + " must be a boolean");
}

const toml::table* get_table(const toml::table& t, std::string_view key) {
  const toml::node* node = t.get(key);
  if (node == nullptr) return nullptr;
  if (const auto* tbl = node->as_table()) return tbl;
  manifest_error(std::string(key) + " must be a table");
}

HeatPumpSpec read_heat_pump(const toml::table& t, const std::string& ctx) {
  HeatPumpSpec s;
  s.nominal_power = get_number(t, "nominal_power", std::nullopt, ctx);
  s.technical_efficiency = get_number(t, "technical_efficiency", 0.2, ctx);
  s.cop_cap = get_number(t, "cop_cap", 10.0, ctx);
  const auto mode = get_string(t, "mode", "cooling", ctx);
  if (mode == "cooling") {
    s.mode = HeatPumpMode::kCooling;
  } else if (mode == "heating") {
    s.mode = HeatPumpMode::kHeating;
  } else {
    manifest_error(ctx + ".mode must be cooling or heating");
  }
  s.target_temp = get_number(t, "target_temp",
                             s.mode == HeatPumpMode::kCooling ? 8.0 : 45.0, ctx);
  return s;
}

ElectricHeaterSpec read_heater(const toml::table& t, const std::string& ctx) {
  ElectricHeaterSpec s;
  s.nominal_power = get_number(t, "nominal_power", std::nullopt, ctx);
  s.efficiency = get_number(t, "efficiency", 0.9, ctx);
  return s;
}

StorageSpec read_storage(const toml::table& t, const std::string& ctx,
                         const StorageSpec& defaults) {
  StorageSpec s = defaults;
  s.capacity = get_number(t, "capacity", std::nullopt, ctx);
  const double nominal = get_number(t, "nominal_power", defaults.max_charge_power, ctx);
  s.max_charge_power = get_number(t, "max_charge_power", nominal, ctx);
  s.max_discharge_power = get_number(t, "max_discharge_power", nominal, ctx);
  s.round_trip_efficiency =
      get_number(t, "round_trip_efficiency", defaults.round_trip_efficiency, ctx);
  s.soc_min_fraction = get_number(t, "soc_min_fraction", defaults.soc_min_fraction, ctx);
  s.loss_per_step = get_number(t, "loss_per_step", defaults.loss_per_step, ctx);
  return s;
}

// ---------------------------------------------------------------- series

void check_non_negative(const TimeSeries& s, const std::string& where) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0.0) {
      fail(ErrorCode::kValidation,
           where + ": series '" + s.name + "' row " + std::to_string(i + 1) +
               ": negative value " + format_double(s[i]));
    }
  }
}

void check_finite(const TimeSeries& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i])) {
      fail(ErrorCode::kValidation, "series '" + s.name + "' row " +
                                       std::to_string(i + 1) + " is not finite");
    }
  }
}

TimeSeries column(const CsvTable& table, const std::string& column_name,
                  const std::string& prefix, bool non_negative = false) {
  TimeSeries s;
  s.name = prefix.empty() ? column_name : prefix + "." + column_name;
  s.values = table.numeric_column(column_name);
  if (non_negative) {
    const std::size_t col = table.column_index(column_name);
    for (std::size_t r = 0; r < s.size(); ++r) {
      if (s[r] < 0.0) {
        fail(ErrorCode::kValidation, table.location(r, col) + " (row " +
                                         std::to_string(r + 1) + "): negative value " +
                                         format_double(s[r]));
      }
    }
  }
  return s;
}

bool valid_building_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
           return std::isalnum(c) != 0;
         });
}

std::string write_series_csv(const std::vector<const TimeSeries*>& series,
                             const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    out += (c ? "," : "") + header[c];
  }
  out += '\n';
  const std::size_t n = series.empty() ? 0 : series.front()->size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < series.size(); ++c) {
      if (c) out += ',';
      out += format_double((*series[c])[r]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

toml::table storage_table(const StorageSpec& s) {
  return toml::table{{"capacity", s.capacity},
                     {"max_charge_power", s.max_charge_power},
                     {"max_discharge_power", s.max_discharge_power},
                     {"round_trip_efficiency", s.round_trip_efficiency},
                     {"soc_min_fraction", s.soc_min_fraction},
                     {"loss_per_step", s.loss_per_step}};
}

}  // namespace

// ------------------------------------------------------------------ TimeAxis

LocalMinutes make_local_time(int year, unsigned month, unsigned day, int hour,
                             int minute) {
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  if (!ymd.ok()) fail(ErrorCode::kParse, "invalid calendar date");
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59) {
    fail(ErrorCode::kParse, "invalid time of day");
  }
  return local_days{ymd} + hours{hour} + minutes{minute};
}

std::string format_timestamp(LocalMinutes t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()));
  return buf;
}

LocalMinutes TimeAxis::time_at(std::size_t step) const {
  return start + minutes{static_cast<long long>(step) * step_minutes};
}

int TimeAxis::hour_at(std::size_t step) const {
  const auto t = time_at(step);
  return static_cast<int>(hh_mm_ss{t - floor<days>(t)}.hours().count());
}

int TimeAxis::day_of_week_at(std::size_t step) const {
  return static_cast<int>(weekday{floor<days>(time_at(step))}.iso_encoding());
}

bool TimeAxis::is_weekend_at(std::size_t step) const {
  return day_of_week_at(step) >= 6;
}

// ----------------------------------------------------------------------- TOU

bool TouBand::contains(int hour) const {
  if (start_hour < end_hour) return hour >= start_hour && hour < end_hour;
  return hour >= start_hour || hour < end_hour;
}

TouSchedule default_tou_schedule() {
  TouSchedule s;
  s.weekday_bands = {{7, 15, 0.0291, "mid-peak"},
                     {15, 18, 0.0587, "on-peak"},
                     {18, 22, 0.0291, "mid-peak"},
                     {22, 7, 0.0289, "off-peak"}};
  s.weekend_rate = 0.0289;
  return s;
}

void validate(const TouSchedule& schedule) {
  if (!(schedule.weekend_rate > 0.0)) {
    fail(ErrorCode::kValidation, "weekend TOU rate must be > 0");
  }
  for (const auto& band : schedule.weekday_bands) {
    if (band.start_hour < 0 || band.start_hour > 23 || band.end_hour < 0 ||
        band.end_hour > 24) {
      fail(ErrorCode::kValidation, "TOU band hours out of range");
    }
    if (!(band.rate > 0.0)) fail(ErrorCode::kValidation, "TOU rates must be > 0");
  }
  for (int hour = 0; hour < 24; ++hour) {
    const auto matches = std::count_if(
        schedule.weekday_bands.begin(), schedule.weekday_bands.end(),
        [hour](const TouBand& b) { return b.contains(hour); });
    if (matches != 1) {
      fail(ErrorCode::kValidation,
           "weekday hour " + std::to_string(hour) + " is covered by " +
               std::to_string(matches) + " TOU bands, expected exactly 1");
    }
  }
}

double tou_rate(const TouSchedule& schedule, DayType day_type, int hour) {
  if (hour < 0 || hour > 23) {
    fail(ErrorCode::kInvalidArgument, "hour " + std::to_string(hour) + " out of range");
  }
  if (day_type == DayType::kWeekend) return schedule.weekend_rate;
  for (const auto& band : schedule.weekday_bands) {
    if (band.contains(hour)) return band.rate;
  }
  fail(ErrorCode::kValidation, "no TOU band covers hour " + std::to_string(hour));
}

// --------------------------------------------------------------------- split

SplitRanges split(std::size_t n_steps, std::size_t steps_per_day,
                  const SplitSpec& spec) {
  if (steps_per_day == 0 || n_steps % steps_per_day != 0) {
    fail(ErrorCode::kValidation, "horizon of " + std::to_string(n_steps) +
                                     " steps is not a whole number of days");
  }
  const std::size_t days = n_steps / steps_per_day;
  if (spec.train_days < 0 || spec.test_days < 0 ||
      static_cast<std::size_t>(spec.train_days + spec.test_days) != days) {
    fail(ErrorCode::kValidation,
         "split " + std::to_string(spec.train_days) + "+" +
             std::to_string(spec.test_days) + " days does not match horizon of " +
             std::to_string(days) + " days");
  }
  const std::size_t boundary = static_cast<std::size_t>(spec.train_days) * steps_per_day;
  return {{0, boundary}, {boundary, n_steps}};
}

// ------------------------------------------------------------------- district

double DistrictDataset::rate_at(std::size_t step) const {
  if (price) return (*price)[step];
  return tou_rate(tou, axis.is_weekend_at(step) ? DayType::kWeekend : DayType::kWeekday,
                  axis.hour_at(step));
}

const BuildingDataset* DistrictDataset::find_building(const std::string& id) const {
  for (const auto& b : buildings) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

void validate(const DistrictDataset& d) {
  if (d.n_steps == 0) fail(ErrorCode::kValidation, "dataset has no steps");
  if (d.axis.step_minutes <= 0 ||
      d.steps_per_day * static_cast<std::size_t>(d.axis.step_minutes) != 24 * 60) {
    fail(ErrorCode::kValidation, "steps_per_day * step_minutes must equal 1440");
  }
  auto aligned = [&](const TimeSeries& s) {
    if (s.size() != d.n_steps) {
      fail(ErrorCode::kValidation, "series '" + s.name + "' has " +
                                       std::to_string(s.size()) +
                                       " rows, expected " + std::to_string(d.n_steps));
    }
    check_finite(s);
  };
  aligned(d.outdoor_temp);
  aligned(d.pv_per_kw);
  aligned(d.carbon);
  check_non_negative(d.pv_per_kw, d.weather_file.string());
  check_non_negative(d.carbon, d.carbon_file.string());
  if (d.price) {
    aligned(*d.price);
    for (std::size_t i = 0; i < d.price->size(); ++i) {
      if (!((*d.price)[i] > 0.0)) {
        fail(ErrorCode::kValidation, "price row " + std::to_string(i + 1) +
                                         ": rate must be > 0");
      }
    }
  } else {
    validate(d.tou);
  }
  split(d.n_steps, d.steps_per_day, d.split_spec);

  if (d.buildings.empty()) fail(ErrorCode::kValidation, "dataset has no buildings");
  std::set<std::string> ids;
  for (const auto& b : d.buildings) {
    if (!valid_building_id(b.id)) {
      fail(ErrorCode::kValidation,
           "building id '" + b.id + "' must be non-empty and alphanumeric");
    }
    if (!ids.insert(b.id).second) {
      fail(ErrorCode::kValidation, "duplicate building id '" + b.id + "'");
    }
    const std::string where = b.data_file.string();
    for (const TimeSeries* s : {&b.cooling_load, &b.dhw_load, &b.plug_load, &b.setpoint}) {
      aligned(*s);
    }
    check_non_negative(b.cooling_load, where);
    check_non_negative(b.dhw_load, where);
    check_non_negative(b.plug_load, where);

    const auto positive = [](const TimeSeries& s) {
      return std::any_of(s.values.begin(), s.values.end(), [](double v) { return v > 0.0; });
    };
    if (b.heat_pump) {
      validate(*b.heat_pump);
    } else if (positive(b.cooling_load)) {
      fail(ErrorCode::kValidation, "building '" + b.id + "' has cooling load but no heat_pump");
    }
    if (b.dhw_heater) {
      validate(*b.dhw_heater);
    } else if (positive(b.dhw_load) || b.dhw_storage) {
      fail(ErrorCode::kValidation,
           "building '" + b.id + "' has DHW demand or storage but no dhw_heater");
    }
    if (b.dhw_storage) validate(*b.dhw_storage);
    if (b.battery) validate(*b.battery);
    if (b.pv) validate(*b.pv);
    validate(b.thermal);
    if (b.surrogate) validate(*b.surrogate);
  }

  if (d.outage.settings.mode == OutageMode::kStatic &&
      d.outage.settings.static_series.size() != d.n_steps) {
    fail(ErrorCode::kValidation, "static outage series has " +
                                     std::to_string(d.outage.settings.static_series.size()) +
                                     " rows, expected " + std::to_string(d.n_steps));
  }
  if (d.outage.settings.mode == OutageMode::kStochastic) validate(d.outage.settings.params);
}

DistrictDataset load_district(const fs::path& directory) {
  const fs::path manifest_path = directory / kManifestName;
  if (!fs::exists(manifest_path)) {
    fail(ErrorCode::kIo, "missing manifest " + manifest_path.string());
  }
  toml::table root;
  try {
    root = toml::parse_file(manifest_path.string());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << manifest_path.string() << ":" << e.source().begin.line << ":"
        << e.source().begin.column << ": " << e.description();
    fail(ErrorCode::kParse, msg.str());
  }

  const std::string top = "manifest";
  const auto version = get_integer(root, "schema_version", kManifestVersion, top);
  if (version != kManifestVersion) {
    manifest_error("unsupported schema_version " + std::to_string(version));
  }

  DistrictDataset d;
  d.name = get_string(root, "name", directory.filename().string(), top);
  if (const toml::node* start = root.get("start")) {
    if (auto dt = start->value<toml::date_time>()) {
      d.axis.start = make_local_time(dt->date.year, dt->date.month, dt->date.day,
                                     dt->time.hour, dt->time.minute);
    } else if (auto ld = start->value<toml::date>()) {
      d.axis.start = make_local_time(ld->year, ld->month, ld->day);
    } else if (auto s = start->value<std::string>()) {
      d.axis.start = parse_timestamp(*s);
    } else {
      manifest_error("start must be a date-time");
    }
  } else {
    manifest_error("start is required");
  }
  d.axis.step_minutes = static_cast<int>(get_integer(root, "step_minutes", 60, top));
  d.steps_per_day = static_cast<std::size_t>(
      get_integer(root, "steps_per_day", 24 * 60 / std::max(d.axis.step_minutes, 1), top));

  d.weather_file = get_string(root, "weather", "weather.csv", top);
  d.carbon_file = get_string(root, "carbon", "carbon.csv", top);
  const CsvTable weather = read_csv(directory / d.weather_file);
  d.outdoor_temp = column(weather, "outdoor_temp_c", "");
  d.pv_per_kw = column(weather, "pv_per_kw_kwh", "", true);
  const CsvTable carbon = read_csv(directory / d.carbon_file);
  d.carbon = column(carbon, "kg_co2e_per_kwh", "", true);
  if (root.contains("price")) {
    d.price_file = get_string(root, "price", std::nullopt, top);
    const CsvTable price = read_csv(directory / d.price_file);
    d.price = column(price, "rate_usd_per_kwh", "");
  }
  d.n_steps = d.outdoor_temp.size();

  d.tou = default_tou_schedule();
  if (const auto* tariff = get_table(root, "tariff")) {
    d.tou.weekend_rate = get_number(*tariff, "weekend_rate", d.tou.weekend_rate, "tariff");
    d.tariff.include_fixed_charges =
        get_bool(*tariff, "include_fixed_charges", false, "tariff");
    d.tariff.fixed_charge_per_day =
        get_number(*tariff, "fixed_charge_per_day", 0.0, "tariff");
    if (const toml::node* bands = tariff->get("weekday")) {
      const auto* arr = bands->as_array();
      if (arr == nullptr) manifest_error("tariff.weekday must be an array of tables");
      d.tou.weekday_bands.clear();
      for (const auto& node : *arr) {
        const auto* band = node.as_table();
        if (band == nullptr) manifest_error("tariff.weekday entries must be tables");
        TouBand b;
        b.start_hour = static_cast<int>(get_integer(*band, "start_hour", std::nullopt, "tariff.weekday"));
        b.end_hour = static_cast<int>(get_integer(*band, "end_hour", std::nullopt, "tariff.weekday"));
        b.rate = get_number(*band, "rate", std::nullopt, "tariff.weekday");
        b.tier = get_string(*band, "tier", "", "tariff.weekday");
        d.tou.weekday_bands.push_back(b);
      }
    }
  }

  if (const auto* s = get_table(root, "split")) {
    d.split_spec.train_days = static_cast<int>(get_integer(*s, "train_days", std::nullopt, "split"));
    d.split_spec.test_days = static_cast<int>(get_integer(*s, "test_days", std::nullopt, "split"));
  } else {
    manifest_error("split table is required");
  }

  if (const auto* o = get_table(root, "outage")) {
    const auto mode = get_string(*o, "mode", "none", "outage");
    auto& settings = d.outage.settings;
    if (mode == "none") {
      settings.mode = OutageMode::kNone;
    } else if (mode == "static") {
      settings.mode = OutageMode::kStatic;
      d.outage.static_file = get_string(*o, "path", std::nullopt, "outage");
      settings.static_series = read_outage_csv(directory / d.outage.static_file);
    } else if (mode == "stochastic") {
      settings.mode = OutageMode::kStochastic;
    } else {
      manifest_error("outage.mode must be none, static or stochastic");
    }
    settings.params.saifi = get_number(*o, "saifi", 0.0, "outage");
    settings.params.caidi = get_number(*o, "caidi", 1.0, "outage");
    settings.params.seed = static_cast<std::uint64_t>(get_integer(*o, "seed", 0, "outage"));
  }

  const toml::node* buildings = root.get("buildings");
  const toml::array* arr = buildings ? buildings->as_array() : nullptr;
  if (arr == nullptr || arr->empty()) manifest_error("at least one [[buildings]] entry is required");
  for (const auto& node : *arr) {
    const auto* bt = node.as_table();
    if (bt == nullptr) manifest_error("buildings entries must be tables");
    BuildingDataset b;
    b.id = get_string(*bt, "id", std::nullopt, "buildings");
    const std::string ctx = "buildings[" + b.id + "]";
    b.data_file = get_string(*bt, "data", b.id + ".csv", ctx);
    const CsvTable table = read_csv(directory / b.data_file);
    b.cooling_load = column(table, "cooling_load_kwh", b.id, true);
    b.dhw_load = column(table, "dhw_load_kwh", b.id, true);
    b.plug_load = column(table, "plug_load_kwh", b.id, true);
    b.setpoint = column(table, "setpoint_c", b.id);

    if (const auto* t = get_table(*bt, "heat_pump")) b.heat_pump = read_heat_pump(*t, ctx + ".heat_pump");
    if (const auto* t = get_table(*bt, "dhw_heater")) b.dhw_heater = read_heater(*t, ctx + ".dhw_heater");
    if (const auto* t = get_table(*bt, "dhw_storage")) {
      StorageSpec defaults;
      defaults.round_trip_efficiency = 1.0;
      defaults.loss_per_step = 0.002;
      defaults.soc_min_fraction = 0.0;
      // Charge and discharge rates default to the heater's nominal power.
      defaults.max_charge_power = b.dhw_heater ? b.dhw_heater->nominal_power : 0.0;
      b.dhw_storage = read_storage(*t, ctx + ".dhw_storage", defaults);
    }
    if (const auto* t = get_table(*bt, "battery")) {
      StorageSpec defaults;
      defaults.round_trip_efficiency = 0.9;
      defaults.loss_per_step = 0.0;
      defaults.soc_min_fraction = 0.2;
      b.battery = read_storage(*t, ctx + ".battery", defaults);
    }
    if (const auto* t = get_table(*bt, "pv")) {
      b.pv = PvSpec{get_number(*t, "nominal_power", std::nullopt, ctx + ".pv")};
    }
    if (const auto* t = get_table(*bt, "thermal")) {
      b.thermal.thermal_capacitance =
          get_number(*t, "capacitance", b.thermal.thermal_capacitance, ctx + ".thermal");
      b.thermal.envelope_conductance =
          get_number(*t, "conductance", b.thermal.envelope_conductance, ctx + ".thermal");
      b.thermal.internal_gain =
          get_number(*t, "internal_gain", b.thermal.internal_gain, ctx + ".thermal");
    }
    if (bt->contains("surrogate")) {
      b.surrogate_file = get_string(*bt, "surrogate", std::nullopt, ctx);
      b.surrogate = std::make_shared<const RecurrentSurrogate>(
          load_surrogate(directory / b.surrogate_file));
    }
    d.buildings.push_back(std::move(b));
  }

  validate(d);
  return d;
}

void save_district(const DistrictDataset& d, const fs::path& directory) {
  validate(d);
  fs::create_directories(directory);

  const auto day = floor<days>(d.axis.start);
  const year_month_day ymd{day};
  const hh_mm_ss hms{d.axis.start - day};
  toml::table root{
      {"schema_version", kManifestVersion},
      {"name", d.name},
      {"start", toml::date_time{toml::date{static_cast<int>(ymd.year()),
                                           static_cast<unsigned>(ymd.month()),
                                           static_cast<unsigned>(ymd.day())},
                                toml::time{static_cast<unsigned>(hms.hours().count()),
                                           static_cast<unsigned>(hms.minutes().count())}}},
      {"step_minutes", d.axis.step_minutes},
      {"steps_per_day", static_cast<int64_t>(d.steps_per_day)},
      {"weather", d.weather_file.generic_string()},
      {"carbon", d.carbon_file.generic_string()},
  };
  if (d.price) root.insert("price", d.price_file.empty() ? "price.csv" : d.price_file.generic_string());

  toml::array bands;
  for (const auto& b : d.tou.weekday_bands) {
    bands.push_back(toml::table{{"start_hour", b.start_hour},
                                {"end_hour", b.end_hour},
                                {"rate", b.rate},
                                {"tier", b.tier}});
  }
  root.insert("tariff", toml::table{{"weekend_rate", d.tou.weekend_rate},
                                    {"include_fixed_charges", d.tariff.include_fixed_charges},
                                    {"fixed_charge_per_day", d.tariff.fixed_charge_per_day},
                                    {"weekday", bands}});
  root.insert("split", toml::table{{"train_days", d.split_spec.train_days},
                                   {"test_days", d.split_spec.test_days}});

  const auto& outage = d.outage.settings;
  toml::table outage_table{{"saifi", outage.params.saifi},
                           {"caidi", outage.params.caidi},
                           {"seed", static_cast<int64_t>(outage.params.seed)}};
  switch (outage.mode) {
    case OutageMode::kNone: outage_table.insert("mode", "none"); break;
    case OutageMode::kStochastic: outage_table.insert("mode", "stochastic"); break;
    case OutageMode::kStatic: {
      const fs::path file = d.outage.static_file.empty() ? "outage.csv" : d.outage.static_file;
      outage_table.insert("mode", "static");
      outage_table.insert("path", file.generic_string());
      write_outage_csv(directory / file, outage_from_series(outage.static_series, d.n_steps));
      break;
    }
  }
  root.insert("outage", outage_table);

  toml::array buildings;
  for (const auto& b : d.buildings) {
    const fs::path data = b.data_file.empty() ? fs::path(b.id + ".csv") : b.data_file;
    toml::table bt{{"id", b.id}, {"data", data.generic_string()}};
    if (b.heat_pump) {
      const auto& h = *b.heat_pump;
      bt.insert("heat_pump",
                toml::table{{"nominal_power", h.nominal_power},
                            {"technical_efficiency", h.technical_efficiency},
                            {"target_temp", h.target_temp},
                            {"cop_cap", h.cop_cap},
                            {"mode", h.mode == HeatPumpMode::kCooling ? "cooling" : "heating"}});
    }
    if (b.dhw_heater) {
      bt.insert("dhw_heater", toml::table{{"nominal_power", b.dhw_heater->nominal_power},
                                          {"efficiency", b.dhw_heater->efficiency}});
    }
    if (b.dhw_storage) bt.insert("dhw_storage", storage_table(*b.dhw_storage));
    if (b.battery) bt.insert("battery", storage_table(*b.battery));
    if (b.pv) bt.insert("pv", toml::table{{"nominal_power", b.pv->nominal_power}});
    bt.insert("thermal", toml::table{{"capacitance", b.thermal.thermal_capacitance},
                                     {"conductance", b.thermal.envelope_conductance},
                                     {"internal_gain", b.thermal.internal_gain}});
    if (b.surrogate) {
      const fs::path file = b.surrogate_file.empty() ? fs::path(b.id + "_surrogate.json")
                                                     : b.surrogate_file;
      bt.insert("surrogate", file.generic_string());
      write_text(directory / file, surrogate_to_json(*b.surrogate));
    }
    buildings.push_back(std::move(bt));

    write_text(directory / data,
               write_series_csv({&b.cooling_load, &b.dhw_load, &b.plug_load, &b.setpoint},
                                {"cooling_load_kwh", "dhw_load_kwh", "plug_load_kwh",
                                 "setpoint_c"}));
  }
  root.insert("buildings", buildings);

  write_text(directory / d.weather_file,
             write_series_csv({&d.outdoor_temp, &d.pv_per_kw}, {"outdoor_temp_c", "pv_per_kw_kwh"}));
  write_text(directory / d.carbon_file, write_series_csv({&d.carbon}, {"kg_co2e_per_kwh"}));
  if (d.price) {
    write_text(directory / (d.price_file.empty() ? fs::path("price.csv") : d.price_file),
               write_series_csv({&*d.price}, {"rate_usd_per_kwh"}));
  }

  std::ostringstream manifest;
  manifest << root << '\n';
  write_text(directory / kManifestName, manifest.str());
}

}  // namespace gridbench
