#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "irsp/irsp.h"

namespace {

// 0 ok, 1 failure, 2 invalid spec or config, 3 missing input, 4 geometry.
int exit_code(irsp_status s) {
  switch (s) {
    case IRSP_OK: return 0;
    case IRSP_ERR_SPEC:
    case IRSP_ERR_CONFIG:
    case IRSP_ERR_SWEEP:
    case IRSP_ERR_UNSUPPORTED_ORDER:
    case IRSP_ERR_INVALID_ARGUMENT: return 2;
    case IRSP_ERR_MISSING_INPUT: return 3;
    case IRSP_ERR_GEOMETRY: return 4;
    default: return 1;
  }
}

int fail(irsp_status s) {
  std::fprintf(stderr, "error [%s]: %s\n", irsp_status_name(s), irsp_last_error());
  return exit_code(s);
}

void print_and_free(char* run_dir, char* report) {
  if (run_dir != nullptr) std::printf("run directory: %s\n", run_dir);
  if (report != nullptr && report[0] != '\0') std::printf("%s\n", report);
  irsp_string_free(run_dir);
  irsp_string_free(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-source wave experiments: sampling, sweeps, inversion, validation"};
  app.set_version_flag("--version", std::string(irsp_version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = 0;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed (overrides the config)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "root output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);

  auto* sample = app.add_subcommand("sample", "draw one realization and its spectral diagnostics");
  auto* forward = app.add_subcommand("forward", "evaluate the radiated field at the measurement points");
  auto* sweep = app.add_subcommand("sweep", "frequency band average and oracle comparison");
  auto* invert = app.add_subcommand("invert", "Tikhonov reconstruction of phi from the profile");
  auto* validate = app.add_subcommand("validate", "run a property suite");
  std::string suite = "all";
  validate->add_option("suite", suite, "specialfn | greens | ergodic | inversion | all")
      ->check(CLI::IsMember({"specialfn", "greens", "ergodic", "inversion", "all"}));
  auto* schema = app.add_subcommand("schema", "print the configuration keys and defaults");

  CLI11_PARSE(app, argc, argv);

  if (schema->parsed()) {
    char* text = nullptr;
    const irsp_status s = irsp_config_schema(&text);
    if (s != IRSP_OK) return fail(s);
    std::fputs(text, stdout);
    irsp_string_free(text);
    return 0;
  }

  irsp_config* config = nullptr;
  irsp_status s = config_path.empty() ? irsp_config_new(&config)
                                      : irsp_config_load(config_path.c_str(), &config);
  if (s != IRSP_OK) return fail(s);
  const auto set = [&](const char* key, const std::string& value) {
    if (s == IRSP_OK) s = irsp_config_set(config, key, value.c_str());
  };
  if (seed >= 0) set("seed", std::to_string(seed));
  if (!out_dir.empty()) set("output", out_dir);
  if (threads > 0) set("threads", std::to_string(threads));
  if (s == IRSP_OK) s = irsp_config_validate(config);
  if (s == IRSP_OK) {
    char* value = nullptr;
    s = irsp_config_get(config, "threads", &value);
    if (s == IRSP_OK) s = irsp_set_threads(std::atoi(value));
    irsp_string_free(value);
  }
  if (s != IRSP_OK) {
    const int code = fail(s);
    irsp_config_free(config);
    return code;
  }

  char* run_dir = nullptr;
  char* report = nullptr;
  if (sample->parsed()) {
    s = irsp_cmd_sample(config, &run_dir, &report);
  } else if (forward->parsed()) {
    s = irsp_cmd_forward(config, &run_dir, nullptr);
  } else if (sweep->parsed()) {
    s = irsp_cmd_sweep(config, seed >= 0 ? 1 : 0, &run_dir, nullptr);
  } else if (invert->parsed()) {
    s = irsp_cmd_invert(config, &run_dir, &report);
  } else if (validate->parsed()) {
    s = irsp_cmd_validate(config, suite.c_str(), &run_dir, &report);
  }
  irsp_config_free(config);
  print_and_free(run_dir, report);
  return s == IRSP_OK ? 0 : fail(s);
}
