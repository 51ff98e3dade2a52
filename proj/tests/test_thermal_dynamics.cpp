#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "support.hpp"
#include "thermal_dynamics.hpp"

using namespace gridbench;
using namespace gbtest;

namespace {

RecurrentSurrogate zero_model(std::size_t lookback, std::size_t hidden,
                              std::vector<std::string> features) {
  RecurrentSurrogate m;
  m.lookback = lookback;
  m.hidden = hidden;
  m.features = std::move(features);
  const std::size_t f = m.features.size();
  m.input_min.assign(f, 0.0);
  m.input_max.assign(f, 40.0);
  m.output_min = 20.0;
  m.output_max = 30.0;
  m.w_input = {4 * hidden, f, std::vector<double>(4 * hidden * f, 0.0)};
  m.w_recurrent = {4 * hidden, hidden, std::vector<double>(4 * hidden * hidden, 0.0)};
  m.bias.assign(4 * hidden, 0.0);
  m.w_output.assign(hidden, 0.0);
  return m;
}

RecurrentSurrogate random_model(std::mt19937_64& rng, std::size_t lookback, std::size_t hidden) {
  auto m = zero_model(lookback, hidden, {"indoor_temp", "delivered_thermal", "outdoor_temp",
                                         "hour_sin", "dow_cos"});
  std::normal_distribution<double> w(0.0, 0.7);
  for (auto& v : m.w_input.data) v = w(rng);
  for (auto& v : m.w_recurrent.data) v = w(rng);
  for (auto& v : m.bias) v = w(rng);
  for (auto& v : m.w_output) v = w(rng);
  m.b_output = w(rng);
  m.input_min = {15.0, 0.0, 20.0, -1.0, -1.0};
  m.input_max = {35.0, 8.0, 40.0, 1.0, 1.0};
  return m;
}

// Scalar recomputation: one hidden unit at a time, gates evaluated from the
// raw row-major arrays without the model's Matrix accessor.
double oracle_predict(const RecurrentSurrogate& m, const DynamicsInputWindow& w) {
  const std::size_t H = m.hidden, F = m.features.size();
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (std::size_t t = 0; t < w.steps; ++t) {
    std::vector<double> x(F);
    for (std::size_t f = 0; f < F; ++f) {
      x[f] = (w.values[t * F + f] - m.input_min[f]) / (m.input_max[f] - m.input_min[f]);
    }
    std::vector<double> h_next(H), c_next(H);
    for (std::size_t k = 0; k < H; ++k) {
      double gate[4];
      for (int g = 0; g < 4; ++g) {
        const std::size_t row = g * H + k;
        double s = m.bias[row];
        for (std::size_t f = 0; f < F; ++f) s += m.w_input.data[row * F + f] * x[f];
        for (std::size_t j = 0; j < H; ++j) s += m.w_recurrent.data[row * H + j] * h[j];
        gate[g] = s;
      }
      const double i = 1.0 / (1.0 + std::exp(-gate[0]));
      const double fg = 1.0 / (1.0 + std::exp(-gate[1]));
      const double g = std::tanh(gate[2]);
      const double o = 1.0 / (1.0 + std::exp(-gate[3]));
      c_next[k] = fg * c[k] + i * g;
      h_next[k] = o * std::tanh(c_next[k]);
    }
    h = h_next;
    c = c_next;
  }
  double y = m.b_output;
  for (std::size_t k = 0; k < H; ++k) y += m.w_output[k] * h[k];
  const double s = m.output_activation == OutputActivation::kSigmoid
                       ? 1.0 / (1.0 + std::exp(-y))
                       : std::min(std::max(y, 0.0), 1.0);
  return m.output_min + s * (m.output_max - m.output_min);
}

std::vector<DynamicsSample> history(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> temp(18.0, 34.0), heat(0.0, 6.0);
  std::vector<DynamicsSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({temp(rng), heat(rng), temp(rng), static_cast<int>(i % 24),
                   static_cast<int>(1 + i % 7)});
  }
  return out;
}

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_SUITE("thermal_dynamics") {

TEST_CASE("rc step arithmetic") {
  RcModelParams p{2.0, 0.1, 0.0};
  CHECK(rc_step(p, 24.0, 34.0, 0.0, 1.0) == doctest::Approx(24.5).epsilon(1e-15));
  CHECK(rc_step(p, 24.0, 34.0, 2.0, 1.0) == doctest::Approx(23.5).epsilon(1e-15));
  CHECK(rc_step(p, 27.0, 27.0, 0.0, 1.0) == 27.0);
}

TEST_CASE("rc step moves toward outdoor without gain or cooling") {
  RcModelParams p{3.0, 0.15, 0.0};
  for (double indoor : {10.0, 20.0, 29.0, 31.0, 45.0}) {
    const double next = rc_step(p, indoor, 30.0, 0.0, 1.0);
    if (indoor < 30.0) {
      CHECK(next > indoor);
      CHECK(next < 30.0);
    } else {
      CHECK(next < indoor);
      CHECK(next > 30.0);
    }
  }
  CHECK_THROWS_AS(validate(RcModelParams{0.0, 0.1, 0.0}), Error);
  CHECK_THROWS_AS(validate(RcModelParams{1.0, -0.1, 0.0}), Error);
}

TEST_CASE("all-zero model predicts the midpoint of its output bounds") {
  const auto m = zero_model(12, 8, {"indoor_temp", "outdoor_temp"});
  CHECK_NOTHROW(validate(m));
  std::mt19937_64 rng(1);
  const auto w = build_window(m, history(rng, 12));
  const double y = predict_temperature(m, w);
  CHECK(y == 25.0);
  CHECK(std::abs(y - oracle_predict(m, w)) <= 1e-12);
}

TEST_CASE("hand evaluated two-step single-unit model") {
  auto m = zero_model(2, 1, {"indoor_temp"});
  m.input_min = {20.0};
  m.input_max = {30.0};
  m.w_input.data = {0.5, -0.3, 0.8, 0.1};
  m.w_recurrent.data = {0.2, 0.4, -0.6, 0.3};
  m.bias = {0.1, 0.2, -0.1, 0.05};
  m.w_output = {1.5};
  m.b_output = -0.2;
  const std::vector<DynamicsSample> h = {{22.0, 0, 0, 0, 1}, {25.0, 0, 0, 0, 1}};

  // Step 1: x = 0.2, z = (0.2, 0.14, 0.06, 0.07), h0 = c0 = 0.
  const auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double c1 = sig(0.2) * std::tanh(0.06);
  const double h1 = sig(0.07) * std::tanh(c1);
  // Step 2: x = 0.5.
  const double z0 = 0.25 + 0.2 * h1 + 0.1, z1 = -0.15 + 0.4 * h1 + 0.2;
  const double z2 = 0.4 - 0.6 * h1 - 0.1, z3 = 0.05 + 0.3 * h1 + 0.05;
  const double c2 = sig(z1) * c1 + sig(z0) * std::tanh(z2);
  const double h2 = sig(z3) * std::tanh(c2);
  const double expected = 20.0 + 10.0 * sig(1.5 * h2 - 0.2);

  const double y = predict_temperature(m, build_window(m, h));
  CHECK(y == doctest::Approx(expected).epsilon(1e-14));
  CHECK(y == doctest::Approx(24.85636091053524).epsilon(1e-12));
}

TEST_CASE("forward pass matches the scalar oracle on random models") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t L = 1 + trial % 6, H = 1 + trial % 5;
    auto m = random_model(rng, L, H);
    if (trial % 3 == 0) m.output_activation = OutputActivation::kLinear;
    CHECK_NOTHROW(validate(m));
    const auto w = build_window(m, history(rng, L));
    const double y = predict_temperature(m, w);
    const double o = oracle_predict(m, w);
    CHECK(std::abs(y - o) <= 1e-9 * std::abs(o));
    CHECK(y >= m.output_min);
    CHECK(y <= m.output_max);
    CHECK(predict_temperature(m, w) == y);
  }
}

TEST_CASE("window construction") {
  auto m = zero_model(2, 1, {"hour", "day_of_week", "hour_sin", "hour_cos", "dow_sin",
                             "dow_cos", "delivered_thermal"});
  const std::vector<DynamicsSample> h = {{24, 1.5, 30, 6, 1}, {24, 2.5, 30, 12, 7}};
  const auto w = build_window(m, h);
  CHECK(w.steps == 2);
  CHECK(w.features == 7);
  CHECK(w(0, 0) == 6.0);
  CHECK(w(1, 1) == 7.0);
  CHECK(w(0, 2) == doctest::Approx(1.0));
  CHECK(w(1, 3) == doctest::Approx(-1.0));
  CHECK(w(0, 4) == doctest::Approx(0.0));
  CHECK(w(0, 5) == doctest::Approx(1.0));
  CHECK(w(1, 6) == 2.5);
  CHECK(error_code_of([&] { build_window(m, std::span(h).first(1)); }) ==
        ErrorCode::kInvalidArgument);

  DynamicsInputWindow bad = w;
  bad.steps = 3;
  CHECK_THROWS_AS(predict_temperature(m, bad), Error);
}

TEST_CASE("surrogate json round trip and loader errors") {
  std::mt19937_64 rng(9);
  const auto m = random_model(rng, 12, 8);
  const auto text = surrogate_to_json(m);
  const auto back = parse_surrogate(text);
  CHECK(back.lookback == 12);
  CHECK(back.hidden == 8);
  CHECK(back.w_input.data == m.w_input.data);
  CHECK(back.w_recurrent.data == m.w_recurrent.data);
  CHECK(back.bias == m.bias);
  CHECK(back.b_output == m.b_output);
  const auto w = build_window(m, history(rng, 12));
  CHECK(predict_temperature(back, w) == predict_temperature(m, w));

  TempDir dir;
  write_file(dir / "m.json", text);
  CHECK(load_surrogate(dir / "m.json").hidden == 8);
  CHECK(error_code_of([&] { load_surrogate(dir / "missing.json"); }) == ErrorCode::kIo);

  // Recurrent matrix 32x7 with hidden 8.
  auto bad_shape = m;
  bad_shape.w_recurrent = {32, 7, std::vector<double>(32 * 7, 0.0)};
  CHECK_THROWS_WITH(validate(bad_shape), doctest::Contains("recurrent weights are 32x7"));
  std::string reshaped = surrogate_to_json(bad_shape);
  CHECK(error_code_of([&] { parse_surrogate(reshaped); }) == ErrorCode::kValidation);

  auto nan_weight = m;
  nan_weight.w_input.data[3] = NAN;
  CHECK_THROWS_WITH(validate(nan_weight), doctest::Contains("non-finite"));
  std::string with_nan = text;
  with_nan.replace(with_nan.find("\"output_bias\""), 0, "\"x\": NaN, ");
  CHECK_THROWS_AS(parse_surrogate(with_nan), Error);

  auto version = replaced(text, "\"version\": 1", "\"version\": 2");
  CHECK_THROWS_WITH(parse_surrogate(version), doctest::Contains("schema version"));

  auto declared = replaced(text, "\"hidden_size\": 8", "\"hidden_size\": 7");
  CHECK(error_code_of([&] { parse_surrogate(declared); }) == ErrorCode::kValidation);

  CHECK(error_code_of([] { parse_surrogate("{not json"); }) == ErrorCode::kParse);
  CHECK_THROWS_WITH(parse_surrogate("{\"format\":\"other\"}"), doctest::Contains("format"));

  auto bounds = m;
  bounds.input_min[0] = bounds.input_max[0];
  CHECK_THROWS_WITH(validate(bounds), doctest::Contains("min < max"));

  auto unknown = m;
  unknown.features[0] = "humidity";
  CHECK_THROWS_WITH(validate(unknown), doctest::Contains("unknown feature"));
}

}  // TEST_SUITE
