#include "agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "error.hpp"

namespace gridbench {

namespace {

// 53 random bits mapped into [0, 1).
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t index_draw(std::mt19937_64& rng, std::size_t n) {
  return std::min(static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)), n - 1);
}

DayType day_type_at(const Environment& env) {
  return env.dataset().axis.is_weekend_at(env.current_step()) ? DayType::kWeekend
                                                              : DayType::kWeekday;
}

std::vector<double> linspace(double low, double high, std::size_t n) {
  if (n == 1) return {0.5 * (low + high)};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = low + (high - low) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = high;
  return out;
}

void assign_slot(BuildingAction& action, ControlledDevice device, double value) {
  switch (device) {
    case ControlledDevice::kDhwStorage: action.dhw_storage = value; break;
    case ControlledDevice::kBattery: action.battery = value; break;
    case ControlledDevice::kHeatPump: action.heat_pump = value; break;
  }
}

}  // namespace

std::string to_string(RbcKind kind) {
  switch (kind) {
    case RbcKind::kCost: return "cost";
    case RbcKind::kEmission: return "emission";
    case RbcKind::kPeak: return "peak";
  }
  return "unknown";
}

double rbc_cost_act(int hour, DayType day_type) {
  if (hour < 0 || hour > 23) {
    fail(ErrorCode::kInvalidArgument, "hour " + std::to_string(hour) + " outside 0..23");
  }
  if (day_type == DayType::kWeekend) return 1.0 / 24.0;
  if (hour >= 22 || hour < 7) return 1.0 / 9.0;
  if (hour >= 15 && hour < 18) return -0.5 / 3.0;
  return -0.5 / 12.0;
}

double rbc_emission_act(int hour) {
  if (hour < 0 || hour > 23) {
    fail(ErrorCode::kInvalidArgument, "hour " + std::to_string(hour) + " outside 0..23");
  }
  if (hour < 8) return 1.0 / 8.0;
  if (hour >= 12 && hour < 23) return -1.0 / 11.0;
  return 0.0;
}

double rbc_peak_act(int hour) {
  if (hour < 0 || hour > 23) {
    fail(ErrorCode::kInvalidArgument, "hour " + std::to_string(hour) + " outside 0..23");
  }
  if (hour < 6) return 1.0 / 6.0;
  if (hour < 23) return -1.0 / 17.0;
  return 0.0;
}

double RbcSchedule::act(int hour, DayType day_type) const {
  for (const auto& e : entries) {
    if (e.day_type == day_type && hour >= e.start_hour && hour < e.end_hour) return e.action;
  }
  fail(ErrorCode::kInvalidArgument, "rbc schedule has no entry for hour " + std::to_string(hour));
}

RbcSchedule rbc_schedule(RbcKind kind) {
  RbcSchedule s;
  s.kind = kind;
  const auto both = [&](int start, int end, double a) {
    s.entries.push_back({start, end, DayType::kWeekday, a});
    s.entries.push_back({start, end, DayType::kWeekend, a});
  };
  switch (kind) {
    case RbcKind::kCost:
      s.entries = {
          {0, 7, DayType::kWeekday, 1.0 / 9.0},
          {7, 15, DayType::kWeekday, -0.5 / 12.0},
          {15, 18, DayType::kWeekday, -0.5 / 3.0},
          {18, 22, DayType::kWeekday, -0.5 / 12.0},
          {22, 24, DayType::kWeekday, 1.0 / 9.0},
          {0, 24, DayType::kWeekend, 1.0 / 24.0},
      };
      break;
    case RbcKind::kEmission:
      both(0, 8, 1.0 / 8.0);
      both(8, 12, 0.0);
      both(12, 23, -1.0 / 11.0);
      both(23, 24, 0.0);
      break;
    case RbcKind::kPeak:
      both(0, 6, 1.0 / 6.0);
      both(6, 23, -1.0 / 17.0);
      both(23, 24, 0.0);
      break;
  }
  return s;
}

void validate(const RbcSchedule& schedule) {
  for (auto day : {DayType::kWeekday, DayType::kWeekend}) {
    int covered[24] = {};
    for (const auto& e : schedule.entries) {
      if (e.start_hour < 0 || e.end_hour > 24 || e.start_hour >= e.end_hour) {
        fail(ErrorCode::kValidation, "rbc entry [" + std::to_string(e.start_hour) + ", " +
                                         std::to_string(e.end_hour) + ") is not a valid window");
      }
      if (!(e.action >= -1.0 && e.action <= 1.0)) {
        fail(ErrorCode::kValidation, "rbc action outside [-1, 1]");
      }
      if (e.day_type != day) continue;
      for (int h = e.start_hour; h < e.end_hour; ++h) ++covered[h];
    }
    for (int h = 0; h < 24; ++h) {
      if (covered[h] != 1) {
        fail(ErrorCode::kValidation, "rbc hour " + std::to_string(h) + " covered " +
                                         std::to_string(covered[h]) + " times");
      }
    }
  }
}

ActionVector NoopAgent::act(const Environment& env, const std::vector<ObservationVector>&) {
  return ActionVector(env.config().buildings.size());
}

ActionVector RandomAgent::act(const Environment& env, const std::vector<ObservationVector>&) {
  ActionVector actions(env.config().buildings.size());
  for (const auto& slot : action_slots(env.config())) {
    assign_slot(actions[slot.building], slot.device,
                slot.low + (slot.high - slot.low) * unit_draw(rng_));
  }
  return actions;
}

RbcAgent::RbcAgent(RbcKind kind) : schedule_(rbc_schedule(kind)) { validate(schedule_); }

ActionVector RbcAgent::act(const Environment& env, const std::vector<ObservationVector>&) {
  const int hour = env.dataset().axis.hour_at(env.current_step());
  const double a = schedule_.act(hour, day_type_at(env));
  ActionVector actions(env.config().buildings.size());
  for (std::size_t b = 0; b < actions.size(); ++b) {
    const auto& setup = env.config().buildings[b];
    if (setup.heat_pump_control) {
      fail(ErrorCode::kInvalidArgument, "rule-based agents do not drive heat pumps");
    }
    if (setup.dhw_storage) actions[b].dhw_storage = a;
    if (setup.battery) actions[b].battery = a;
  }
  return actions;
}

// ---- Q-learning ----

std::size_t QPolicy::action_cells() const {
  std::size_t n = 1;
  for (const auto& levels : action_levels) n *= levels.size();
  return n;
}

std::uint64_t QPolicy::state_count() const {
  std::uint64_t n = 1;
  for (const auto& f : features) n *= f.bins;
  return n;
}

std::vector<double> QPolicy::cell_actions(std::size_t cell) const {
  std::vector<double> out(action_levels.size());
  for (std::size_t d = 0; d < action_levels.size(); ++d) {
    out[d] = action_levels[d][cell % action_levels[d].size()];
    cell /= action_levels[d].size();
  }
  return out;
}

std::vector<double> QPolicy::row(std::uint64_t state) const {
  const auto it = table.find(state);
  if (it == table.end()) return std::vector<double>(action_cells(), 0.0);
  return it->second;
}

double QPolicy::value(std::uint64_t state, std::size_t cell) const {
  const auto it = table.find(state);
  return it == table.end() ? 0.0 : it->second.at(cell);
}

void validate(const QPolicy& policy) {
  if (!(policy.alpha > 0.0 && policy.alpha <= 1.0)) {
    fail(ErrorCode::kValidation, "q-learning alpha must lie in (0, 1]");
  }
  if (!(policy.gamma >= 0.0 && policy.gamma < 1.0)) {
    fail(ErrorCode::kValidation, "q-learning gamma must lie in [0, 1)");
  }
  if (!(policy.alpha_decay >= 0.0 && policy.alpha_decay <= 1.0)) {
    fail(ErrorCode::kValidation, "q-learning alpha_decay must lie in [0, 1]");
  }
  if (!(policy.epsilon >= 0.0 && policy.epsilon <= 1.0)) {
    fail(ErrorCode::kValidation, "q-learning epsilon must lie in [0, 1]");
  }
  if (policy.action_levels.empty()) fail(ErrorCode::kValidation, "q-learning has no actions");
  for (const auto& levels : policy.action_levels) {
    if (levels.empty()) fail(ErrorCode::kValidation, "empty action grid");
  }
  double log_states = 0.0;
  for (const auto& f : policy.features) {
    if (f.bins == 0) fail(ErrorCode::kValidation, "feature with zero bins");
    if (!(f.high >= f.low)) fail(ErrorCode::kValidation, "feature range inverted");
    log_states += std::log2(static_cast<double>(f.bins));
  }
  if (log_states >= 63.0) fail(ErrorCode::kValidation, "q-learning state space too large");
}

std::size_t feature_bin(const QFeature& f, double value) {
  if (!std::isfinite(value)) fail(ErrorCode::kInvalidArgument, "non-finite observation");
  double pos;
  if (f.discrete) {
    pos = std::round(value - f.low);
  } else if (f.high > f.low) {
    pos = std::floor((value - f.low) / (f.high - f.low) * static_cast<double>(f.bins));
  } else {
    pos = 0.0;
  }
  return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(f.bins - 1)));
}

std::uint64_t q_state(const QPolicy& policy, std::span<const ObservationVector> group) {
  std::uint64_t index = 0;
  std::uint64_t stride = 1;
  for (const auto& f : policy.features) {
    if (f.building >= group.size()) {
      fail(ErrorCode::kInvalidArgument, "observation group lacks building " +
                                            std::to_string(f.building));
    }
    index += feature_bin(f, group[f.building].get(f.name)) * stride;
    stride *= f.bins;
  }
  return index;
}

std::size_t q_act(const QPolicy& policy, std::uint64_t state, bool explore,
                  std::mt19937_64& rng) {
  const std::size_t cells = policy.action_cells();
  if (explore && unit_draw(rng) < policy.epsilon) return index_draw(rng, cells);
  const auto it = policy.table.find(state);
  if (it == policy.table.end()) return 0;
  const auto& row = it->second;
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

void q_update(QPolicy& policy, std::uint64_t state, std::size_t cell, double reward,
              std::uint64_t next_state, bool terminal) {
  const std::size_t cells = policy.action_cells();
  if (cell >= cells) fail(ErrorCode::kInvalidArgument, "action cell out of range");
  double next_best = 0.0;
  if (!terminal) {
    const auto it = policy.table.find(next_state);
    if (it != policy.table.end()) next_best = *std::max_element(it->second.begin(), it->second.end());
  }
  auto& row = policy.table.try_emplace(state, cells, 0.0).first->second;
  double alpha = policy.alpha;
  if (policy.alpha_decay > 0.0) {
    auto& counts = policy.visits.try_emplace(state, cells, 0u).first->second;
    ++counts[cell];
    alpha /= std::pow(static_cast<double>(counts[cell]), policy.alpha_decay);
  }
  row[cell] += alpha * (reward + policy.gamma * next_best - row[cell]);
}

double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "gamma must lie in [0, 1)");
  }
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

std::string to_string(AgentTopology topology) {
  return topology == AgentTopology::kCentralized ? "centralized" : "independent";
}

QLearningAgent::QLearningAgent(QLearningOptions options, std::uint64_t seed)
    : options_(options), rng_(seed) {
  if (options_.bins == 0 || options_.action_levels == 0) {
    fail(ErrorCode::kInvalidArgument, "q-learning needs at least one bin and action level");
  }
  if (!(options_.epsilon_start >= 0.0 && options_.epsilon_start <= 1.0 &&
        options_.epsilon_end >= 0.0 && options_.epsilon_end <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "epsilon bounds must lie in [0, 1]");
  }
}

void QLearningAgent::prepare(Environment& env, std::size_t training_steps) {
  const auto& config = env.config();
  const auto slots = action_slots(config);
  if (slots.empty()) fail(ErrorCode::kInvalidArgument, "q-learning needs a controlled device");

  groups_.clear();
  if (options_.topology == AgentTopology::kCentralized) {
    Group g;
    for (std::size_t b = 0; b < config.buildings.size(); ++b) g.buildings.push_back(b);
    g.slots = slots;
    groups_.push_back(std::move(g));
  } else {
    for (std::size_t b = 0; b < config.buildings.size(); ++b) {
      Group g;
      g.buildings = {b};
      for (const auto& s : slots) {
        if (s.building == b) g.slots.push_back(s);
      }
      if (!g.slots.empty()) groups_.push_back(std::move(g));
    }
  }

  // Observed range of every (building, observation) under random actions.
  std::map<std::pair<std::size_t, ObservationName>, std::pair<double, double>> range;
  const auto record = [&](const std::vector<ObservationVector>& obs) {
    for (std::size_t b = 0; b < obs.size(); ++b) {
      for (std::size_t i = 0; i < obs[b].names.size(); ++i) {
        const double v = obs[b].values[i];
        auto [it, fresh] = range.try_emplace({b, obs[b].names[i]}, v, v);
        if (!fresh) {
          it->second.first = std::min(it->second.first, v);
          it->second.second = std::max(it->second.second, v);
        }
      }
    }
  };
  RandomAgent explorer(rng_());
  auto obs = env.reset(rng_());
  record(obs);
  while (!env.done()) {
    const auto outcome = env.step(explorer.act(env, obs));
    obs = outcome.observations;
    record(obs);
  }

  policies_.clear();
  for (const auto& g : groups_) {
    QPolicy p;
    p.alpha = options_.alpha;
    p.alpha_decay = options_.alpha_decay;
    p.gamma = options_.gamma;
    for (std::size_t local = 0; local < g.buildings.size(); ++local) {
      for (auto name : config.observations) {
        QFeature f;
        f.building = local;
        f.name = name;
        if (name == ObservationName::kHour) {
          f.discrete = true;
          f.low = 0;
          f.high = 23;
          f.bins = 24;
        } else if (name == ObservationName::kDayOfWeek) {
          f.discrete = true;
          f.low = 1;
          f.high = 7;
          f.bins = 7;
        } else {
          const auto [lo, hi] = range.at({g.buildings[local], name});
          f.low = lo;
          f.high = hi;
          f.bins = hi > lo ? options_.bins : 1;
        }
        p.features.push_back(f);
      }
    }
    for (const auto& s : g.slots) {
      p.action_levels.push_back(linspace(s.low, s.high, options_.action_levels));
    }
    validate(p);
    policies_.push_back(std::move(p));
  }
  last_state_.assign(groups_.size(), 0);
  last_cell_.assign(groups_.size(), 0);
  training_steps_ = training_steps;
  steps_taken_ = 0;
  prepared_ = true;
}

double QLearningAgent::epsilon() const {
  if (!training_) return 0.0;
  if (training_steps_ <= 1) return options_.epsilon_end;
  const double progress = std::min(
      static_cast<double>(steps_taken_) / static_cast<double>(training_steps_ - 1), 1.0);
  return options_.epsilon_start + (options_.epsilon_end - options_.epsilon_start) * progress;
}

void QLearningAgent::begin_episode(const Environment&, bool training) {
  if (!prepared_) fail(ErrorCode::kState, "q-learning agent used before prepare()");
  training_ = training;
}

std::vector<ObservationVector> QLearningAgent::group_observations(
    const Group& group, const std::vector<ObservationVector>& all) const {
  std::vector<ObservationVector> out;
  out.reserve(group.buildings.size());
  for (auto b : group.buildings) out.push_back(all.at(b));
  return out;
}

ActionVector QLearningAgent::act(const Environment& env,
                                 const std::vector<ObservationVector>& observations) {
  if (!prepared_) fail(ErrorCode::kState, "q-learning agent used before prepare()");
  ActionVector actions(env.config().buildings.size());
  const double eps = epsilon();
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    auto& policy = policies_[g];
    policy.epsilon = eps;
    const auto group_obs = group_observations(groups_[g], observations);
    last_state_[g] = q_state(policy, group_obs);
    last_cell_[g] = q_act(policy, last_state_[g], training_, rng_);
    const auto values = policy.cell_actions(last_cell_[g]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto& slot = groups_[g].slots[i];
      assign_slot(actions[slot.building], slot.device, values[i]);
    }
  }
  return actions;
}

void QLearningAgent::observe(const Environment&, const StepOutcome& outcome) {
  if (!training_) return;
  const bool centralized = options_.topology == AgentTopology::kCentralized;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto next = q_state(policies_[g], group_observations(groups_[g], outcome.observations));
    const double r = centralized ? outcome.district_reward
                                 : outcome.rewards.at(groups_[g].buildings.front());
    // Time-limit ends bootstrap like any other step.
    q_update(policies_[g], last_state_[g], last_cell_[g], r, next, false);
  }
  ++steps_taken_;
}

}  // namespace gridbench
