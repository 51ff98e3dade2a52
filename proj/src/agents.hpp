#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dataset.hpp"
#include "environment.hpp"

namespace gridbench {

// ---- rule-based control ----

enum class RbcKind { kCost, kEmission, kPeak };

std::string to_string(RbcKind kind);

// Fraction of storage capacity to charge (+) or discharge (-) in the hour.
double rbc_cost_act(int hour, DayType day_type);
double rbc_emission_act(int hour);
double rbc_peak_act(int hour);

struct RbcEntry {
  int start_hour = 0;  // inclusive
  int end_hour = 0;    // exclusive, no wrap
  DayType day_type = DayType::kWeekday;
  double action = 0.0;
};

struct RbcSchedule {
  RbcKind kind = RbcKind::kCost;
  std::vector<RbcEntry> entries;

  double act(int hour, DayType day_type) const;
};

RbcSchedule rbc_schedule(RbcKind kind);
// Hours 0..23 covered exactly once per day type; actions in [-1, 1].
void validate(const RbcSchedule& schedule);

// ---- agent interface ----

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string name() const = 0;
  virtual bool learns() const { return false; }

  // Called after reset and before the first act of every episode.
  virtual void begin_episode(const Environment& env, bool training) {
    (void)env;
    (void)training;
  }
  virtual ActionVector act(const Environment& env,
                           const std::vector<ObservationVector>& observations) = 0;
  virtual void observe(const Environment& env, const StepOutcome& outcome) {
    (void)env;
    (void)outcome;
  }
  virtual void end_episode(const Environment& env) { (void)env; }
};

// Leaves every controlled device at action 0.
class NoopAgent final : public Agent {
 public:
  std::string name() const override { return "none"; }
  ActionVector act(const Environment& env,
                   const std::vector<ObservationVector>& observations) override;
};

// Uniform over each action slot's range.
class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  ActionVector act(const Environment& env,
                   const std::vector<ObservationVector>& observations) override;

 private:
  std::mt19937_64 rng_;
};

// Applies the schedule to every storage device. Heat pumps are not RBC-driven.
class RbcAgent final : public Agent {
 public:
  explicit RbcAgent(RbcKind kind);
  std::string name() const override { return to_string(schedule_.kind) + "-rbc"; }
  ActionVector act(const Environment& env,
                   const std::vector<ObservationVector>& observations) override;

 private:
  RbcSchedule schedule_;
};

// ---- tabular Q-learning ----

struct QFeature {
  std::size_t building = 0;  // index within the observation group
  ObservationName name = ObservationName::kHour;
  bool discrete = false;     // integer-valued, one bin per value from low
  double low = 0.0;
  double high = 0.0;
  std::size_t bins = 1;
};

struct QPolicy {
  std::vector<QFeature> features;
  std::vector<std::vector<double>> action_levels;  // per action dimension
  double alpha = 0.1;
  // Visit-count decay: alpha_n = alpha / n^alpha_decay. Zero keeps alpha fixed.
  double alpha_decay = 0.0;
  double gamma = 0.99;
  double epsilon = 0.0;

  std::unordered_map<std::uint64_t, std::vector<double>> table;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> visits;

  std::size_t action_cells() const;
  std::uint64_t state_count() const;
  // Joint cell index -> one level per action dimension.
  std::vector<double> cell_actions(std::size_t cell) const;
  // Row of action values; all zeros when the state is unvisited.
  std::vector<double> row(std::uint64_t state) const;
  double value(std::uint64_t state, std::size_t cell) const;
};

void validate(const QPolicy& policy);

std::size_t feature_bin(const QFeature& feature, double value);
std::uint64_t q_state(const QPolicy& policy, std::span<const ObservationVector> group);
// Epsilon-greedy over action cells; ties go to the lowest cell.
std::size_t q_act(const QPolicy& policy, std::uint64_t state, bool explore,
                  std::mt19937_64& rng);
// Tabular update toward r + gamma * max_a' Q(s', a'); `terminal` drops the
// bootstrap term.
void q_update(QPolicy& policy, std::uint64_t state, std::size_t cell, double reward,
              std::uint64_t next_state, bool terminal = false);

double discounted_return(std::span<const double> rewards, double gamma);

enum class AgentTopology { kCentralized, kIndependent };

std::string to_string(AgentTopology topology);

struct QLearningOptions {
  std::size_t bins = 8;
  std::size_t action_levels = 5;
  double alpha = 0.1;
  double alpha_decay = 0.0;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  AgentTopology topology = AgentTopology::kCentralized;
};

class QLearningAgent final : public Agent {
 public:
  QLearningAgent(QLearningOptions options, std::uint64_t seed);

  std::string name() const override { return "qlearn"; }
  bool learns() const override { return true; }

  // Sizes the grids from one random-action pass over `env`'s range, and sets
  // the exploration schedule for `training_steps` steps.
  void prepare(Environment& env, std::size_t training_steps);

  void begin_episode(const Environment& env, bool training) override;
  ActionVector act(const Environment& env,
                   const std::vector<ObservationVector>& observations) override;
  void observe(const Environment& env, const StepOutcome& outcome) override;

  const std::vector<QPolicy>& policies() const { return policies_; }
  double epsilon() const;

 private:
  struct Group {
    std::vector<std::size_t> buildings;
    std::vector<ActionSlot> slots;
  };

  std::vector<ObservationVector> group_observations(
      const Group& group, const std::vector<ObservationVector>& all) const;

  QLearningOptions options_;
  std::mt19937_64 rng_;
  std::vector<Group> groups_;
  std::vector<QPolicy> policies_;
  std::vector<std::uint64_t> last_state_;
  std::vector<std::size_t> last_cell_;
  std::size_t training_steps_ = 0;
  std::size_t steps_taken_ = 0;
  bool training_ = false;
  bool prepared_ = false;
};

// ---- out-of-process agents ----

inline constexpr int kProtocolVersion = 1;

// Newline-delimited message transport. Implementations own their descriptors.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(const std::string& line) = 0;
  // nullopt on orderly close by the peer.
  virtual std::optional<std::string> receive_line(std::chrono::milliseconds timeout) = 0;
};

class TcpListener {
 public:
  // Port 0 binds an ephemeral port; see port().
  TcpListener(const std::string& host, int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  std::unique_ptr<LineChannel> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  int port_ = 0;
};

// Listens on host:port and accepts a single client.
std::unique_ptr<LineChannel> accept_tcp_channel(const std::string& host, int port,
                                                std::chrono::milliseconds timeout);
// Spawns `/bin/sh -c command` with its stdin/stdout as the channel.
std::unique_ptr<LineChannel> spawn_process_channel(const std::string& command);
// Client side, used by tests and tools.
std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, int port,
                                                 std::chrono::milliseconds timeout);

struct ExternalAddress {
  enum class Kind { kTcp, kExec } kind = Kind::kTcp;
  std::string host = "127.0.0.1";
  int port = 0;
  std::string command;
};

// "HOST:PORT", ":PORT" or "exec:COMMAND".
ExternalAddress parse_external_address(const std::string& text);

class ExternalAgent final : public Agent {
 public:
  ExternalAgent(std::unique_ptr<LineChannel> channel,
                std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ExternalAgent() override;

  std::string name() const override { return "external:" + peer_name_; }
  bool learns() const override { return true; }

  void begin_episode(const Environment& env, bool training) override;
  ActionVector act(const Environment& env,
                   const std::vector<ObservationVector>& observations) override;
  void observe(const Environment& env, const StepOutcome& outcome) override;
  void end_episode(const Environment& env) override;

  // Sends end{kpis} and closes the session.
  void finish(const std::string& kpis_json);

  const std::string& peer_name() const { return peer_name_; }
  // Clamp notices from the most recent act.
  const std::vector<std::string>& last_clamped() const { return last_clamped_; }

 private:
  void handshake(const Environment& env);
  std::string receive(const std::string& expected_type, std::size_t step);

  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  std::string peer_name_ = "unknown";
  bool greeted_ = false;
  bool finished_ = false;
  bool training_ = false;
  double pending_reward_ = 0.0;
  std::vector<std::string> last_clamped_;
};

}  // namespace gridbench
