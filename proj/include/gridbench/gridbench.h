/* gridbench C API.
 *
 * Handles are opaque. Every call returns a gb_status; on failure the
 * message is available from gb_last_error() on the calling thread until
 * the next failing call there. Strings handed out through char** are owned
 * by the caller and released with gb_string_free(). */
#ifndef GRIDBENCH_GRIDBENCH_H
#define GRIDBENCH_GRIDBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GB_API __declspec(dllexport)
#else
#define GB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gb_status {
  GB_OK = 0,
  GB_ERR_INVALID_ARGUMENT = 1,
  GB_ERR_IO = 2,
  GB_ERR_PARSE = 3,
  GB_ERR_VALIDATION = 4,
  GB_ERR_STATE = 5,
  GB_ERR_PROTOCOL = 6,
  GB_ERR_INTERNAL = 7
} gb_status;

typedef struct gb_dataset gb_dataset;
typedef struct gb_env gb_env;

GB_API const char* gb_version(void);
GB_API const char* gb_status_name(gb_status status);
GB_API const char* gb_last_error(void);
GB_API void gb_string_free(char* s);

/* ---- datasets ---- */

/* Loads district.toml and its CSVs from `directory`, validating every series. */
GB_API gb_status gb_dataset_load(const char* directory, gb_dataset** out);
GB_API void gb_dataset_free(gb_dataset* dataset);
/* JSON: name, calendar, split ranges, per-building devices and load totals. */
GB_API gb_status gb_dataset_summary(const gb_dataset* dataset, char** json_out);

/* ---- step-level environment ---- */

typedef enum gb_phase { GB_PHASE_TRAIN = 0, GB_PHASE_TEST = 1 } gb_phase;

/* Builds the environment a preset describes, over the dataset's train or
 * test range. The dataset must outlive the environment. */
GB_API gb_status gb_env_create(const gb_dataset* dataset, const char* preset, gb_phase phase,
                               gb_env** out);
GB_API void gb_env_free(gb_env* env);

GB_API gb_status gb_env_reset(gb_env* env, uint64_t seed);
/* Flat layout: buildings in preset order, each with its active observations. */
GB_API gb_status gb_env_observation_count(const gb_env* env, size_t* count);
GB_API gb_status gb_env_observation_name(const gb_env* env, size_t index, const char** name);
GB_API gb_status gb_env_observations(const gb_env* env, double* values, size_t count);
GB_API gb_status gb_env_action_count(const gb_env* env, size_t* count);
GB_API gb_status gb_env_action_name(const gb_env* env, size_t index, const char** name);
GB_API gb_status gb_env_action_range(const gb_env* env, size_t index, double* low,
                                     double* high);
/* Out-of-range actions are clamped; `clamped` (optional) receives how many. */
GB_API gb_status gb_env_step(gb_env* env, const double* actions, size_t count,
                             double* district_reward, int* done, size_t* clamped);
GB_API gb_status gb_env_kpis_json(const gb_env* env, char** json_out);
GB_API gb_status gb_env_trace_csv(const gb_env* env, char** csv_out);

/* ---- benchmark runs ---- */

typedef struct gb_run_options {
  uint64_t seed;
  int64_t epochs;             /* < 0: agent default */
  uint32_t workers;           /* matrix and m-sweep parallelism, >= 1 */
  const char* agent;          /* NULL, "none", "rbc", "qlearn", "random", "external:ADDR" */
  double m;                   /* <= 0: preset default */
  const char* outage_mode;    /* NULL: dataset; "none", "static", "stochastic" */
  const char* outage_file;    /* static mode */
  double saifi;               /* stochastic mode */
  double caidi;
  uint64_t outage_seed;
  double agent_timeout_s;     /* <= 0: 30 s */
} gb_run_options;

GB_API void gb_run_options_init(gb_run_options* options);

/* Writes kpis.json, kpis.txt, trace.csv and daily_peaks.csv under out_dir
 * (skipped when out_dir is NULL). text_out receives the text report. */
GB_API gb_status gb_run(const gb_dataset* dataset, const char* preset,
                        const gb_run_options* options, const char* out_dir, char** text_out);
/* Same as gb_run but returns kpis.json content. */
GB_API gb_status gb_run_json(const gb_dataset* dataset, const char* preset,
                             const gb_run_options* options, char** json_out);

/* Per-run failures are reported inside the result and do not fail the call.
 * `failed` (optional) receives their number. */
GB_API gb_status gb_run_matrix(const gb_dataset* dataset, const char* const* presets,
                               size_t count, const gb_run_options* options,
                               const char* out_dir, char** text_out, size_t* failed);
/* JSON array of the 17 benchmark preset names. */
GB_API gb_status gb_table_presets(char** json_out);

GB_API gb_status gb_m_sweep(const gb_dataset* dataset, const char* preset,
                            const double* multipliers, size_t count,
                            const gb_run_options* options, const char* out_dir,
                            char** text_out);

/* Writes a one-column outage CSV covering days * steps_per_day steps. */
GB_API gb_status gb_outage_generate(double saifi, double caidi, uint64_t seed, size_t days,
                                    size_t steps_per_day, const char* csv_path,
                                    char** json_out);

#ifdef __cplusplus
}
#endif

#endif
