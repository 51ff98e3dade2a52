#include "thermal_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace gridbench {

namespace {

constexpr int kSurrogateVersion = 1;
constexpr const char* kSurrogateFormat = "gridbench-lstm";

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void invalid(const std::string& message) {
  fail(ErrorCode::kValidation, "surrogate: " + message);
}

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

std::vector<double> read_numbers(const nlohmann::json& node,
                                 const std::string& what) {
  if (!node.is_array()) invalid(what + " must be an array");
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& v : node) {
    if (!v.is_number()) invalid("non-finite or non-numeric value in " + what);
    out.push_back(v.get<double>());
  }
  return out;
}

Matrix read_matrix(const nlohmann::json& node, const std::string& what) {
  if (!node.is_object() || !node.contains("shape") || !node.contains("data")) {
    invalid(what + " must be an object with shape and data");
  }
  const auto& shape = node.at("shape");
  if (!shape.is_array() || shape.empty() || shape.size() > 2) {
    invalid(what + " shape must have one or two dimensions");
  }
  Matrix m;
  m.rows = shape[0].get<std::size_t>();
  m.cols = shape.size() == 2 ? shape[1].get<std::size_t>() : 1;
  m.data = read_numbers(node.at("data"), what);
  if (m.data.size() != m.rows * m.cols) {
    invalid(what + " declares shape " + shape_str(m.rows, m.cols) + " but has " +
            std::to_string(m.data.size()) + " values");
  }
  return m;
}

nlohmann::json write_matrix(std::size_t rows, std::size_t cols,
                            const std::vector<double>& data, bool vector) {
  nlohmann::json node;
  node["shape"] = vector ? nlohmann::json::array({rows})
                         : nlohmann::json::array({rows, cols});
  node["data"] = data;
  return node;
}

double feature_value(std::string_view name, const DynamicsSample& s) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (name == "indoor_temp") return s.indoor_temp;
  if (name == "delivered_thermal") return s.delivered_thermal;
  if (name == "outdoor_temp") return s.outdoor_temp;
  if (name == "hour") return s.hour;
  if (name == "day_of_week") return s.day_of_week;
  if (name == "hour_sin") return std::sin(kTwoPi * s.hour / 24.0);
  if (name == "hour_cos") return std::cos(kTwoPi * s.hour / 24.0);
  if (name == "dow_sin") return std::sin(kTwoPi * (s.day_of_week - 1) / 7.0);
  if (name == "dow_cos") return std::cos(kTwoPi * (s.day_of_week - 1) / 7.0);
  fail(ErrorCode::kValidation, "unknown dynamics feature " + std::string(name));
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

void validate(const RcModelParams& params) {
  if (!(params.thermal_capacitance > 0.0)) {
    fail(ErrorCode::kValidation, "thermal_capacitance must be > 0");
  }
  if (!(params.envelope_conductance >= 0.0)) {
    fail(ErrorCode::kValidation, "envelope_conductance must be >= 0");
  }
  if (!std::isfinite(params.internal_gain)) {
    fail(ErrorCode::kValidation, "internal_gain must be finite");
  }
}

double rc_step(const RcModelParams& params, double indoor, double outdoor,
               double delivered_cooling_kwh, double dt_hours) {
  const double net_power = params.envelope_conductance * (outdoor - indoor) +
                           params.internal_gain -
                           delivered_cooling_kwh / dt_hours;
  return indoor + dt_hours * net_power / params.thermal_capacitance;
}

void validate(const RecurrentSurrogate& m) {
  if (m.version != kSurrogateVersion) {
    invalid("unknown schema version " + std::to_string(m.version));
  }
  if (m.lookback == 0) invalid("lookback must be > 0");
  if (m.hidden == 0) invalid("hidden size must be > 0");
  const std::size_t f = m.feature_count();
  if (f == 0) invalid("feature list is empty");
  for (const auto& name : m.features) {
    if (!is_known_dynamics_feature(name)) invalid("unknown feature " + name);
  }
  const std::size_t gates = 4 * m.hidden;
  if (m.w_input.rows != gates || m.w_input.cols != f) {
    invalid("input weights are " + shape_str(m.w_input.rows, m.w_input.cols) +
            ", expected " + shape_str(gates, f));
  }
  if (m.w_recurrent.rows != gates || m.w_recurrent.cols != m.hidden) {
    invalid("recurrent weights are " +
            shape_str(m.w_recurrent.rows, m.w_recurrent.cols) + ", expected " +
            shape_str(gates, m.hidden));
  }
  if (m.bias.size() != gates) invalid("bias length must be 4*hidden");
  if (m.w_output.size() != m.hidden) invalid("output weights length must be hidden");
  if (m.input_min.size() != f || m.input_max.size() != f) {
    invalid("normalization bounds must have one entry per feature");
  }
  for (std::size_t i = 0; i < f; ++i) {
    if (!(m.input_min[i] < m.input_max[i])) {
      invalid("input bounds for " + m.features[i] + " need min < max");
    }
  }
  if (!(m.output_min < m.output_max)) invalid("output bounds need min < max");
  if (!all_finite(m.w_input.data) || !all_finite(m.w_recurrent.data) ||
      !all_finite(m.bias) || !all_finite(m.w_output) ||
      !std::isfinite(m.b_output) || !all_finite(m.input_min) ||
      !all_finite(m.input_max) || !std::isfinite(m.output_min) ||
      !std::isfinite(m.output_max)) {
    invalid("non-finite weight or bound");
  }
}

RecurrentSurrogate parse_surrogate(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("surrogate: ") + e.what());
  }
  RecurrentSurrogate m;
  try {
    if (doc.value("format", std::string()) != kSurrogateFormat) {
      invalid(std::string("format must be \"") + kSurrogateFormat + "\"");
    }
    m.version = doc.at("version").get<int>();
    if (m.version != kSurrogateVersion) {
      invalid("unknown schema version " + std::to_string(m.version));
    }
    m.lookback = doc.at("lookback").get<std::size_t>();
    m.hidden = doc.at("hidden_size").get<std::size_t>();
    m.features = doc.at("features").get<std::vector<std::string>>();
    m.input_min = read_numbers(doc.at("input_min"), "input_min");
    m.input_max = read_numbers(doc.at("input_max"), "input_max");
    if (!doc.at("output_min").is_number() || !doc.at("output_max").is_number()) {
      invalid("output bounds must be numbers");
    }
    m.output_min = doc.at("output_min").get<double>();
    m.output_max = doc.at("output_max").get<double>();
    const auto activation = doc.value("output_activation", std::string("sigmoid"));
    if (activation == "sigmoid") {
      m.output_activation = OutputActivation::kSigmoid;
    } else if (activation == "linear") {
      m.output_activation = OutputActivation::kLinear;
    } else {
      invalid("output_activation must be sigmoid or linear");
    }
    const auto& w = doc.at("weights");
    m.w_input = read_matrix(w.at("input"), "weights.input");
    m.w_recurrent = read_matrix(w.at("recurrent"), "weights.recurrent");
    m.bias = read_matrix(w.at("bias"), "weights.bias").data;
    m.w_output = read_matrix(w.at("output"), "weights.output").data;
    const auto head_bias = read_matrix(w.at("output_bias"), "weights.output_bias");
    if (head_bias.data.size() != 1) invalid("weights.output_bias must hold one value");
    m.b_output = head_bias.data[0];
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("surrogate: ") + e.what());
  }
  validate(m);
  return m;
}

RecurrentSurrogate load_surrogate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open surrogate file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_surrogate(text.str());
}

std::string surrogate_to_json(const RecurrentSurrogate& m) {
  nlohmann::json doc;
  doc["format"] = kSurrogateFormat;
  doc["version"] = m.version;
  doc["lookback"] = m.lookback;
  doc["hidden_size"] = m.hidden;
  doc["features"] = m.features;
  doc["input_min"] = m.input_min;
  doc["input_max"] = m.input_max;
  doc["output_min"] = m.output_min;
  doc["output_max"] = m.output_max;
  doc["output_activation"] =
      m.output_activation == OutputActivation::kSigmoid ? "sigmoid" : "linear";
  auto& w = doc["weights"];
  w["input"] = write_matrix(m.w_input.rows, m.w_input.cols, m.w_input.data, false);
  w["recurrent"] = write_matrix(m.w_recurrent.rows, m.w_recurrent.cols,
                                m.w_recurrent.data, false);
  w["bias"] = write_matrix(m.bias.size(), 1, m.bias, true);
  w["output"] = write_matrix(1, m.w_output.size(), m.w_output, false);
  w["output_bias"] = write_matrix(1, 1, {m.b_output}, true);
  return doc.dump(2);
}

bool is_known_dynamics_feature(std::string_view name) {
  static constexpr std::string_view kNames[] = {
      "indoor_temp", "delivered_thermal", "outdoor_temp", "hour", "day_of_week",
      "hour_sin",    "hour_cos",          "dow_sin",      "dow_cos"};
  return std::find(std::begin(kNames), std::end(kNames), name) != std::end(kNames);
}

DynamicsInputWindow build_window(const RecurrentSurrogate& model,
                                 std::span<const DynamicsSample> history) {
  if (history.size() != model.lookback) {
    fail(ErrorCode::kInvalidArgument,
         "dynamics history has " + std::to_string(history.size()) +
             " steps, model lookback is " + std::to_string(model.lookback));
  }
  DynamicsInputWindow window;
  window.steps = history.size();
  window.features = model.feature_count();
  window.values.reserve(window.steps * window.features);
  for (const auto& sample : history) {
    for (const auto& name : model.features) {
      window.values.push_back(feature_value(name, sample));
    }
  }
  return window;
}

double predict_temperature(const RecurrentSurrogate& model,
                           const DynamicsInputWindow& window) {
  if (window.steps != model.lookback || window.features != model.feature_count()) {
    fail(ErrorCode::kInvalidArgument,
         "window is " + shape_str(window.steps, window.features) +
             ", model expects " + shape_str(model.lookback, model.feature_count()));
  }
  const std::size_t H = model.hidden;
  const std::size_t F = model.feature_count();
  std::vector<double> h(H, 0.0), c(H, 0.0), x(F), z(4 * H);

  for (std::size_t t = 0; t < window.steps; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      x[f] = (window(t, f) - model.input_min[f]) /
             (model.input_max[f] - model.input_min[f]);
    }
    for (std::size_t r = 0; r < 4 * H; ++r) {
      double acc = model.bias[r];
      for (std::size_t f = 0; f < F; ++f) acc += model.w_input(r, f) * x[f];
      for (std::size_t k = 0; k < H; ++k) acc += model.w_recurrent(r, k) * h[k];
      z[r] = acc;
    }
    for (std::size_t k = 0; k < H; ++k) {
      const double in_gate = sigmoid(z[k]);
      const double forget_gate = sigmoid(z[H + k]);
      const double candidate = std::tanh(z[2 * H + k]);
      const double out_gate = sigmoid(z[3 * H + k]);
      c[k] = forget_gate * c[k] + in_gate * candidate;
      h[k] = out_gate * std::tanh(c[k]);
    }
  }

  double y = model.b_output;
  for (std::size_t k = 0; k < H; ++k) y += model.w_output[k] * h[k];
  y = model.output_activation == OutputActivation::kSigmoid
          ? sigmoid(y)
          : std::clamp(y, 0.0, 1.0);
  return model.output_min + y * (model.output_max - model.output_min);
}

}  // namespace gridbench
