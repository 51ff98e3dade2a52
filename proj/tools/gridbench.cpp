#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridbench/gridbench.h"

namespace {

struct CommonOptions {
  std::string data = GRIDBENCH_DEFAULT_DATA;
  std::uint64_t seed = 0;
  std::int64_t epochs = -1;
  std::uint32_t workers = 1;
  std::string agent;
  std::string out;
  std::string outage;
  std::string outage_file;
  double saifi = 0.0;
  double caidi = 1.0;
  std::uint64_t outage_seed = 0;
  double agent_timeout = 0.0;
};

struct StringDeleter {
  void operator()(char* s) const { gb_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct DatasetDeleter {
  void operator()(gb_dataset* d) const { gb_dataset_free(d); }
};
using OwnedDataset = std::unique_ptr<gb_dataset, DatasetDeleter>;

int report_failure(gb_status status) {
  std::cerr << "gridbench: " << gb_status_name(status) << ": " << gb_last_error() << "\n";
  return status == GB_ERR_INVALID_ARGUMENT ? 2 : 1;
}

void add_data(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--data", o.data, "district dataset directory")->capture_default_str();
}

void add_run_options(CLI::App* cmd, CommonOptions& o) {
  add_data(cmd, o);
  cmd->add_option("--seed", o.seed, "run seed")->envname("GRIDBENCH_SEED");
  cmd->add_option("--epochs", o.epochs, "training epochs for learning agents");
  cmd->add_option("--workers", o.workers, "parallel runs")->check(CLI::PositiveNumber);
  cmd->add_option("--agent", o.agent, "none | rbc | qlearn | random | external:ADDR");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--outage", o.outage, "outage mode override")
      ->check(CLI::IsMember({"none", "static", "stochastic"}));
  cmd->add_option("--outage-file", o.outage_file, "static outage CSV");
  cmd->add_option("--saifi", o.saifi, "interruptions per year");
  cmd->add_option("--caidi", o.caidi, "hours per interruption");
  cmd->add_option("--outage-seed", o.outage_seed, "outage generator seed");
  cmd->add_option("--agent-timeout", o.agent_timeout, "seconds to wait for an external agent");
}

gb_run_options to_run_options(const CommonOptions& o) {
  gb_run_options r;
  gb_run_options_init(&r);
  r.seed = o.seed;
  r.epochs = o.epochs;
  r.workers = o.workers;
  r.agent = o.agent.empty() ? nullptr : o.agent.c_str();
  r.outage_mode = o.outage.empty() ? nullptr : o.outage.c_str();
  r.outage_file = o.outage_file.empty() ? nullptr : o.outage_file.c_str();
  r.saifi = o.saifi;
  r.caidi = o.caidi;
  r.outage_seed = o.outage_seed;
  r.agent_timeout_s = o.agent_timeout;
  return r;
}

int load(const std::string& dir, OwnedDataset& out) {
  gb_dataset* d = nullptr;
  const gb_status s = gb_dataset_load(dir.c_str(), &d);
  if (s != GB_OK) return report_failure(s);
  out.reset(d);
  return 0;
}

const char* out_or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"District building energy-flexibility simulator and benchmark"};
  app.set_version_flag("--version", gb_version());
  app.require_subcommand(1);

  CommonOptions o;
  std::string preset;
  std::vector<std::string> presets;
  std::vector<double> multipliers = {1, 3, 6, 12};
  double m = 0.0;

  auto* run_cmd = app.add_subcommand("run", "train (if learning) and evaluate one preset");
  add_run_options(run_cmd, o);
  run_cmd->add_option("--preset", preset, "algo-buildings-objective-devices")->required();
  run_cmd->add_option("--m", m, "over-cooling multiplier for discomfort runs");

  auto* matrix_cmd = app.add_subcommand("matrix", "run many presets, default all 17");
  add_run_options(matrix_cmd, o);
  matrix_cmd->add_option("--preset", presets, "preset to include (repeatable)");

  auto* sweep_cmd = app.add_subcommand("m-sweep", "vary the over-cooling multiplier");
  add_run_options(sweep_cmd, o);
  preset = "rlc-b1-d_o-hp";
  sweep_cmd->add_option("--preset", preset, "discomfort preset")->capture_default_str();
  sweep_cmd->add_option("--m", multipliers, "multipliers")->capture_default_str();

  std::size_t days = 30, steps_per_day = 24;
  std::string outage_out;
  auto* gen_cmd = app.add_subcommand("gen-outage", "write a stochastic outage CSV");
  gen_cmd->add_option("--saifi", o.saifi, "interruptions per year")->required();
  gen_cmd->add_option("--caidi", o.caidi, "hours per interruption")->required();
  gen_cmd->add_option("--seed", o.seed, "generator seed")->envname("GRIDBENCH_SEED");
  gen_cmd->add_option("--days", days, "days to cover")->capture_default_str();
  gen_cmd->add_option("--steps-per-day", steps_per_day, "steps per day")->capture_default_str();
  gen_cmd->add_option("--out", outage_out, "CSV path")->required();

  auto* validate_cmd = app.add_subcommand("validate-data", "load and check a dataset");
  add_data(validate_cmd, o);

  auto* presets_cmd = app.add_subcommand("presets", "list the benchmark presets");

  CLI11_PARSE(app, argc, argv);

  if (*presets_cmd) {
    char* json = nullptr;
    const gb_status s = gb_table_presets(&json);
    if (s != GB_OK) return report_failure(s);
    OwnedString owned(json);
    std::cout << json << "\n";
    return 0;
  }

  if (*gen_cmd) {
    char* json = nullptr;
    const gb_status s = gb_outage_generate(o.saifi, o.caidi, o.seed, days, steps_per_day,
                                           outage_out.c_str(), &json);
    if (s != GB_OK) return report_failure(s);
    OwnedString owned(json);
    std::cout << json;
    return 0;
  }

  OwnedDataset dataset;
  if (const int rc = load(o.data, dataset); rc != 0) return rc;

  if (*validate_cmd) {
    char* json = nullptr;
    const gb_status s = gb_dataset_summary(dataset.get(), &json);
    if (s != GB_OK) return report_failure(s);
    OwnedString owned(json);
    std::cout << "ok\n" << json;
    return 0;
  }

  gb_run_options options = to_run_options(o);
  char* text = nullptr;

  if (*run_cmd) {
    options.m = m;
    const gb_status s =
        gb_run(dataset.get(), preset.c_str(), &options, out_or_null(o.out), &text);
    if (s != GB_OK) return report_failure(s);
    OwnedString owned(text);
    std::cout << text;
    return 0;
  }

  if (*matrix_cmd) {
    if (presets.empty()) {
      char* json = nullptr;
      const gb_status s = gb_table_presets(&json);
      if (s != GB_OK) return report_failure(s);
      OwnedString owned(json);
      // ["a","b",...]: names contain no quotes or escapes.
      std::string list = json;
      for (std::size_t p = list.find('"'); p != std::string::npos;) {
        const std::size_t q = list.find('"', p + 1);
        presets.push_back(list.substr(p + 1, q - p - 1));
        p = list.find('"', q + 1);
      }
    }
    std::vector<const char*> names;
    for (const auto& p : presets) names.push_back(p.c_str());
    std::size_t failed = 0;
    const gb_status s = gb_run_matrix(dataset.get(), names.data(), names.size(), &options,
                                      out_or_null(o.out), &text, &failed);
    if (s != GB_OK) return report_failure(s);
    OwnedString owned(text);
    std::cout << text;
    if (failed > 0) {
      std::cerr << "gridbench: " << failed << " of " << names.size() << " runs failed\n";
      return 3;
    }
    return 0;
  }

  if (*sweep_cmd) {
    const gb_status s = gb_m_sweep(dataset.get(), preset.c_str(), multipliers.data(),
                                   multipliers.size(), &options, out_or_null(o.out), &text);
    if (s != GB_OK) return report_failure(s);
    OwnedString owned(text);
    std::cout << text;
    return 0;
  }
  return 0;
}
