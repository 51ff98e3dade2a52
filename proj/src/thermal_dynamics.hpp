#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gridbench {

// First-order (single capacitance) zone model used when no trained
// surrogate is configured.
struct RcModelParams {
  double thermal_capacitance = 3.0;   // kWh/degC
  double envelope_conductance = 0.15; // kW/degC
  double internal_gain = 0.3;         // kW
};

void validate(const RcModelParams& params);

// T' = T + dt * (UA * (T_out - T) + gain - cooling / dt) / C
double rc_step(const RcModelParams& params, double indoor, double outdoor,
               double delivered_cooling_kwh, double dt_hours);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
};

enum class OutputActivation { kSigmoid, kLinear };

// Single-layer LSTM with an affine head. Gate rows are stacked in the order
// input, forget, candidate, output (4 * hidden rows).
struct RecurrentSurrogate {
  int version = 1;
  std::size_t lookback = 0;
  std::size_t hidden = 0;
  std::vector<std::string> features;
  std::vector<double> input_min;
  std::vector<double> input_max;
  double output_min = 0.0;
  double output_max = 1.0;
  OutputActivation output_activation = OutputActivation::kSigmoid;
  Matrix w_input;      // 4H x F
  Matrix w_recurrent;  // 4H x H
  std::vector<double> bias;      // 4H
  std::vector<double> w_output;  // H
  double b_output = 0.0;

  std::size_t feature_count() const { return features.size(); }
};

// Checks every shape and bound; throws kValidation on the first violation.
void validate(const RecurrentSurrogate& model);

RecurrentSurrogate parse_surrogate(std::string_view json_text);
RecurrentSurrogate load_surrogate(const std::filesystem::path& path);
std::string surrogate_to_json(const RecurrentSurrogate& model);

// Lookback window, one row per step (oldest first), columns in the model's
// feature order.
struct DynamicsInputWindow {
  std::size_t steps = 0;
  std::size_t features = 0;
  std::vector<double> values;  // steps x features, row-major

  double operator()(std::size_t step, std::size_t feature) const {
    return values[step * features + feature];
  }
};

// One observed step of the quantities a surrogate may consume.
struct DynamicsSample {
  double indoor_temp = 0.0;
  double delivered_thermal = 0.0;
  double outdoor_temp = 0.0;
  int hour = 0;
  int day_of_week = 1;
};

// Names accepted in a surrogate's feature list.
bool is_known_dynamics_feature(std::string_view name);

DynamicsInputWindow build_window(const RecurrentSurrogate& model,
                                 std::span<const DynamicsSample> history);

double predict_temperature(const RecurrentSurrogate& model,
                           const DynamicsInputWindow& window);

}  // namespace gridbench
