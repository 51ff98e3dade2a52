#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "dataset.hpp"
#include "environment.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "gridbench/gridbench.h"
#include "outage.hpp"
#include "runner.hpp"
#include "trace.hpp"

using namespace gridbench;

struct gb_dataset {
  std::shared_ptr<const DistrictDataset> data;
};

struct gb_env {
  std::shared_ptr<const DistrictDataset> data;
  RunConfig config;
  std::unique_ptr<Environment> env;
  std::vector<std::string> observation_names;
  std::vector<ActionSlot> slots;
};

namespace {

thread_local std::string g_last_error;

gb_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return GB_ERR_INVALID_ARGUMENT;
    case ErrorCode::kIo: return GB_ERR_IO;
    case ErrorCode::kParse: return GB_ERR_PARSE;
    case ErrorCode::kValidation: return GB_ERR_VALIDATION;
    case ErrorCode::kState: return GB_ERR_STATE;
    case ErrorCode::kProtocol: return GB_ERR_PROTOCOL;
  }
  return GB_ERR_INTERNAL;
}

template <typename F>
gb_status guarded(F&& body) {
  try {
    body();
    return GB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GB_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) {
  if (out != nullptr) *out = dup_string(s);
}

RunConfig configure(const char* preset, const gb_run_options* options) {
  require(preset, "preset");
  RunConfig config = preset_config(preset);
  gb_run_options defaults;
  gb_run_options_init(&defaults);
  const gb_run_options& o = options != nullptr ? *options : defaults;

  config.seed = o.seed;
  if (o.epochs >= 0) config.epochs = static_cast<std::size_t>(o.epochs);
  if (o.agent != nullptr) apply_agent_override(config, o.agent);
  if (o.agent_timeout_s > 0.0) {
    config.agent.timeout =
        std::chrono::milliseconds(static_cast<long long>(o.agent_timeout_s * 1000.0));
  }
  if (o.m > 0.0) {
    if (config.env.reward.kind != RewardKind::kDiscomfortConsumption) {
      fail(ErrorCode::kInvalidArgument,
           "m applies to discomfort_consumption rewards only, not " + config.id());
    }
    config.env.reward.m = o.m;
  }
  if (o.outage_mode != nullptr) {
    const std::string mode = o.outage_mode;
    OutageSettings s;
    if (mode == "none") {
      s.mode = OutageMode::kNone;
    } else if (mode == "static") {
      require(o.outage_file, "outage_file");
      s.mode = OutageMode::kStatic;
      s.static_series = read_outage_csv(o.outage_file);
    } else if (mode == "stochastic") {
      s.mode = OutageMode::kStochastic;
      s.params = {o.saifi, o.caidi, o.outage_seed};
      validate(s.params);
    } else {
      fail(ErrorCode::kInvalidArgument,
           "unknown outage mode '" + mode + "' (none, static, stochastic)");
    }
    config.outage = std::move(s);
  }
  return config;
}

std::size_t worker_count(const gb_run_options* options) {
  return options != nullptr && options->workers > 0 ? options->workers : 1;
}

void require_env_index(const gb_env* env, std::size_t index, std::size_t count) {
  require(env, "env");
  if (index >= count) {
    fail(ErrorCode::kInvalidArgument, "index " + std::to_string(index) + " out of range (" +
                                          std::to_string(count) + ")");
  }
}

}  // namespace

extern "C" {

const char* gb_version(void) { return "0.1.0"; }

const char* gb_status_name(gb_status status) {
  switch (status) {
    case GB_OK: return "ok";
    case GB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GB_ERR_IO: return "i/o error";
    case GB_ERR_PARSE: return "parse error";
    case GB_ERR_VALIDATION: return "validation error";
    case GB_ERR_STATE: return "state error";
    case GB_ERR_PROTOCOL: return "protocol error";
    case GB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* gb_last_error(void) { return g_last_error.c_str(); }

void gb_string_free(char* s) { std::free(s); }

gb_status gb_dataset_load(const char* directory, gb_dataset** out) {
  return guarded([&] {
    require(directory, "directory");
    require(out, "out");
    *out = nullptr;
    auto d = std::make_shared<const DistrictDataset>(load_district(directory));
    *out = new gb_dataset{std::move(d)};
  });
}

void gb_dataset_free(gb_dataset* dataset) { delete dataset; }

gb_status gb_dataset_summary(const gb_dataset* dataset, char** json_out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(json_out, "json_out");
    put_string(json_out, dataset_summary_json(*dataset->data));
  });
}

gb_status gb_env_create(const gb_dataset* dataset, const char* preset, gb_phase phase,
                        gb_env** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<gb_env>();
    handle->data = dataset->data;
    handle->config = configure(preset, nullptr);
    validate(handle->config, *handle->data);
    EnvironmentConfig ec = handle->config.env;
    ec.outage = handle->data->outage.settings;
    const auto ranges = handle->data->ranges();
    if (phase != GB_PHASE_TRAIN && phase != GB_PHASE_TEST) {
      fail(ErrorCode::kInvalidArgument, "unknown phase");
    }
    handle->env = std::make_unique<Environment>(
        handle->data, ec, phase == GB_PHASE_TRAIN ? ranges.train : ranges.test);
    for (const auto& b : ec.buildings) {
      for (auto name : ec.observations) {
        handle->observation_names.push_back(b.building_id + "." + std::string(to_string(name)));
      }
    }
    handle->slots = action_slots(ec);
    *out = handle.release();
  });
}

void gb_env_free(gb_env* env) { delete env; }

gb_status gb_env_reset(gb_env* env, uint64_t seed) {
  return guarded([&] {
    require(env, "env");
    env->env->reset(seed);
  });
}

gb_status gb_env_observation_count(const gb_env* env, size_t* count) {
  return guarded([&] {
    require(env, "env");
    require(count, "count");
    *count = env->observation_names.size();
  });
}

gb_status gb_env_observation_name(const gb_env* env, size_t index, const char** name) {
  return guarded([&] {
    require_env_index(env, index, env ? env->observation_names.size() : 0);
    require(name, "name");
    *name = env->observation_names[index].c_str();
  });
}

gb_status gb_env_observations(const gb_env* env, double* values, size_t count) {
  return guarded([&] {
    require(env, "env");
    require(values, "values");
    if (count != env->observation_names.size()) {
      fail(ErrorCode::kInvalidArgument, "expected " +
                                            std::to_string(env->observation_names.size()) +
                                            " observation slots, got " + std::to_string(count));
    }
    std::size_t i = 0;
    for (const auto& o : env->env->observations()) {
      for (double v : o.values) values[i++] = v;
    }
  });
}

gb_status gb_env_action_count(const gb_env* env, size_t* count) {
  return guarded([&] {
    require(env, "env");
    require(count, "count");
    *count = env->slots.size();
  });
}

gb_status gb_env_action_name(const gb_env* env, size_t index, const char** name) {
  return guarded([&] {
    require_env_index(env, index, env ? env->slots.size() : 0);
    require(name, "name");
    *name = env->slots[index].name.c_str();
  });
}

gb_status gb_env_action_range(const gb_env* env, size_t index, double* low, double* high) {
  return guarded([&] {
    require_env_index(env, index, env ? env->slots.size() : 0);
    require(low, "low");
    require(high, "high");
    *low = env->slots[index].low;
    *high = env->slots[index].high;
  });
}

gb_status gb_env_step(gb_env* env, const double* actions, size_t count,
                      double* district_reward, int* done, size_t* clamped) {
  return guarded([&] {
    require(env, "env");
    if (count > 0) require(actions, "actions");
    const auto vector = unflatten_actions(env->env->config(), {actions, count});
    const auto outcome = env->env->step(vector);
    if (district_reward != nullptr) *district_reward = outcome.district_reward;
    if (done != nullptr) *done = outcome.done ? 1 : 0;
    if (clamped != nullptr) *clamped = outcome.info.clamped.size();
  });
}

gb_status gb_env_kpis_json(const gb_env* env, char** json_out) {
  return guarded([&] {
    require(env, "env");
    require(json_out, "json_out");
    put_string(json_out, report_json(compute_report(env->config.id(), env->env->trace(),
                                                    env->data->tariff)));
  });
}

gb_status gb_env_trace_csv(const gb_env* env, char** csv_out) {
  return guarded([&] {
    require(env, "env");
    require(csv_out, "csv_out");
    put_string(csv_out, trace_csv(env->env->trace()));
  });
}

void gb_run_options_init(gb_run_options* options) {
  if (options == nullptr) return;
  *options = gb_run_options{};
  options->epochs = -1;
  options->workers = 1;
  options->caidi = 1.0;
}

gb_status gb_run(const gb_dataset* dataset, const char* preset, const gb_run_options* options,
                 const char* out_dir, char** text_out) {
  return guarded([&] {
    require(dataset, "dataset");
    const auto result = run(configure(preset, options), dataset->data);
    if (out_dir != nullptr) write_run_outputs(result, *dataset->data, out_dir);
    put_string(text_out, run_text(result));
  });
}

gb_status gb_run_json(const gb_dataset* dataset, const char* preset,
                      const gb_run_options* options, char** json_out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(json_out, "json_out");
    put_string(json_out, run_json(run(configure(preset, options), dataset->data)));
  });
}

gb_status gb_run_matrix(const gb_dataset* dataset, const char* const* presets, size_t count,
                        const gb_run_options* options, const char* out_dir, char** text_out,
                        size_t* failed) {
  return guarded([&] {
    require(dataset, "dataset");
    if (count > 0) require(presets, "presets");
    std::vector<RunConfig> configs;
    for (std::size_t i = 0; i < count; ++i) configs.push_back(configure(presets[i], options));
    const auto entries = run_matrix(configs, dataset->data, worker_count(options));
    if (out_dir != nullptr) write_matrix_outputs(entries, *dataset->data, out_dir);
    if (failed != nullptr) {
      *failed = 0;
      for (const auto& e : entries) *failed += e.result ? 0 : 1;
    }
    put_string(text_out, matrix_text(entries));
  });
}

gb_status gb_table_presets(char** json_out) {
  return guarded([&] {
    require(json_out, "json_out");
    put_string(json_out, nlohmann::json(table_presets()).dump());
  });
}

gb_status gb_m_sweep(const gb_dataset* dataset, const char* preset, const double* multipliers,
                     size_t count, const gb_run_options* options, const char* out_dir,
                     char** text_out) {
  return guarded([&] {
    require(dataset, "dataset");
    if (count > 0) require(multipliers, "multipliers");
    std::vector<double> ms(multipliers, multipliers + count);
    const auto rows =
        m_sweep(configure(preset, options), ms, dataset->data, worker_count(options));
    if (out_dir != nullptr) write_m_sweep_outputs(rows, out_dir);
    put_string(text_out, m_sweep_text(rows));
  });
}

gb_status gb_outage_generate(double saifi, double caidi, uint64_t seed, size_t days,
                             size_t steps_per_day, const char* csv_path, char** json_out) {
  return guarded([&] {
    if (days == 0 || steps_per_day == 0) {
      fail(ErrorCode::kInvalidArgument, "days and steps_per_day must be positive");
    }
    const ReliabilityParams params{saifi, caidi, seed};
    validate(params);
    const auto signal = generate_outages(params, days, steps_per_day);
    if (csv_path != nullptr) write_outage_csv(csv_path, signal);
    nlohmann::ordered_json doc;
    doc["saifi"] = saifi;
    doc["caidi"] = caidi;
    doc["seed"] = seed;
    doc["steps"] = signal.size();
    doc["events"] = signal.events.size();
    doc["outage_steps"] = signal.outage_steps();
    put_string(json_out, doc.dump(2) + "\n");
  });
}

}  // extern "C"
