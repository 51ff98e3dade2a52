#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gridbench {

struct ReliabilityParams {
  double saifi = 0.0;  // interruptions per year
  double caidi = 1.0;  // hours per interruption
  std::uint64_t seed = 0;
};

void validate(const ReliabilityParams& params);

struct OutageEvent {
  std::size_t start_step = 0;
  // Drawn length, ceiled to whole steps, before truncation at the horizon.
  std::size_t duration_steps = 0;
  double duration_hours = 0.0;
};

struct OutageSignal {
  std::vector<std::uint8_t> grid_down;  // 1 = outage at that step
  bool stochastic = false;
  ReliabilityParams params;             // meaningful when stochastic
  std::vector<OutageEvent> events;      // empty for static signals

  std::size_t size() const { return grid_down.size(); }
  bool at(std::size_t step) const { return grid_down[step] != 0; }
  std::size_t outage_steps() const;
};

// Probability that a given day carries an outage: saifi / 365, capped at 1.
double daily_outage_probability(double saifi);

// Flags each day independently, places one event per flagged day at a
// uniformly drawn start step, and draws its length from an exponential with
// mean CAIDI. Overlapping events merge; events are cut at the horizon.
OutageSignal generate_outages(const ReliabilityParams& params,
                              std::size_t n_days, std::size_t steps_per_day);

OutageSignal outage_from_series(std::span<const std::uint8_t> grid_down,
                                std::size_t horizon);

// One-column CSV ("outage"), values 0/1 or true/false.
std::vector<std::uint8_t> read_outage_csv(const std::filesystem::path& path);
void write_outage_csv(const std::filesystem::path& path,
                      const OutageSignal& signal);

enum class OutageMode { kNone, kStatic, kStochastic };

struct OutageSettings {
  OutageMode mode = OutageMode::kNone;
  ReliabilityParams params;
  std::vector<std::uint8_t> static_series;  // full dataset horizon
};

}  // namespace gridbench
