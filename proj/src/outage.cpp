#include "outage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "csv.hpp"
#include "error.hpp"

namespace gridbench {

namespace {

constexpr double kDaysPerYear = 365.0;

// Explicit transforms of the raw engine output keep signals identical across
// standard library implementations.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(static_cast<std::size_t>(unit_uniform(rng) * n), n - 1);
}

}  // namespace

void validate(const ReliabilityParams& params) {
  if (!(params.saifi >= 0.0) || !std::isfinite(params.saifi)) {
    fail(ErrorCode::kValidation, "saifi must be >= 0");
  }
  if (!(params.caidi > 0.0) || !std::isfinite(params.caidi)) {
    fail(ErrorCode::kValidation, "caidi must be > 0");
  }
}

std::size_t OutageSignal::outage_steps() const {
  return static_cast<std::size_t>(
      std::count(grid_down.begin(), grid_down.end(), std::uint8_t{1}));
}

double daily_outage_probability(double saifi) {
  return std::min(saifi / kDaysPerYear, 1.0);
}

OutageSignal generate_outages(const ReliabilityParams& params,
                              std::size_t n_days, std::size_t steps_per_day) {
  validate(params);
  if (n_days == 0) fail(ErrorCode::kInvalidArgument, "n_days must be > 0");
  if (steps_per_day == 0) {
    fail(ErrorCode::kInvalidArgument, "steps_per_day must be > 0");
  }
  const std::size_t horizon = n_days * steps_per_day;
  const double hours_per_step = 24.0 / static_cast<double>(steps_per_day);
  const double p = daily_outage_probability(params.saifi);

  OutageSignal signal;
  signal.grid_down.assign(horizon, 0);
  signal.stochastic = true;
  signal.params = params;

  std::mt19937_64 rng(params.seed);
  for (std::size_t day = 0; day < n_days; ++day) {
    const bool flagged = unit_uniform(rng) < p;
    if (!flagged) continue;
    OutageEvent event;
    event.start_step = day * steps_per_day + uniform_index(rng, steps_per_day);
    event.duration_hours = -params.caidi * std::log1p(-unit_uniform(rng));
    event.duration_steps = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(event.duration_hours / hours_per_step)));
    const std::size_t end = std::min(horizon, event.start_step + event.duration_steps);
    std::fill(signal.grid_down.begin() + static_cast<std::ptrdiff_t>(event.start_step),
              signal.grid_down.begin() + static_cast<std::ptrdiff_t>(end),
              std::uint8_t{1});
    signal.events.push_back(event);
  }
  return signal;
}

OutageSignal outage_from_series(std::span<const std::uint8_t> grid_down,
                                std::size_t horizon) {
  if (grid_down.size() != horizon) {
    fail(ErrorCode::kValidation,
         "outage series has " + std::to_string(grid_down.size()) +
             " steps, horizon is " + std::to_string(horizon));
  }
  OutageSignal signal;
  signal.grid_down.reserve(horizon);
  for (auto v : grid_down) signal.grid_down.push_back(v != 0 ? 1 : 0);
  return signal;
}

std::vector<std::uint8_t> read_outage_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t col = table.column_index("outage");
  std::vector<std::uint8_t> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& cell = table.rows[r][col];
    if (cell == "1" || cell == "true" || cell == "True") {
      out.push_back(1);
    } else if (cell == "0" || cell == "false" || cell == "False") {
      out.push_back(0);
    } else {
      fail(ErrorCode::kParse, table.location(r, col) + ": expected boolean, got '" +
                                  cell + "'");
    }
  }
  return out;
}

void write_outage_csv(const std::filesystem::path& path,
                      const OutageSignal& signal) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "outage\n";
  for (auto v : signal.grid_down) out << (v ? 1 : 0) << '\n';
}

}  // namespace gridbench
