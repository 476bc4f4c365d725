#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "irsp/estimator.hpp"
#include "irsp/inversion.hpp"

namespace irsp {

struct ConfigKey {
  const char* name;
  const char* fallback;
  const char* help;
};

// Every recognised key with its default. "auto" defaults resolve from the
// model dimension.
const std::vector<ConfigKey>& config_schema();

// Flat "key = value" configuration. Lines starting with '#' are comments.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  // All keys in schema order, one "key = value" line each.
  std::string serialize() const;

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  // FNV-1a of the serialization without the output and threads keys.
  std::uint64_t hash() const;
  std::string hash_hex() const;

  // Cross-field checks; throws ErrorCode::Config.
  void validate() const;

  WaveModel model() const;
  int dimension() const;
  double order() const;
  FieldSpec field_spec() const;
  ElasticParams elastic() const;
  MeasurementSet measurements() const;
  FrequencySweep sweep() const;
  Grid inversion_grid() const;
  std::vector<double> lambda_grid() const;
  std::vector<double> forward_frequencies() const;
  std::uint64_t seed() const;

  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  bool flag(const std::string& key) const;

  bool operator==(const ExperimentConfig& other) const { return values_ == other.values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::string command;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, double>> timings;  // seconds
  std::string to_json() const;
};

struct CommandResult {
  std::string run_dir;
  RunManifest manifest;
  std::string report;  // JSON
  bool passed = true;
};

// Run directory <output>/<hash>.
std::string run_directory(const ExperimentConfig& config);

CommandResult cmd_sample(const ExperimentConfig& config);
CommandResult cmd_forward(const ExperimentConfig& config);
// Without a stored sample, seed_given decides between sampling now and a
// missing-input error.
CommandResult cmd_sweep(const ExperimentConfig& config, bool seed_given);
CommandResult cmd_invert(const ExperimentConfig& config);
// suite: specialfn | greens | ergodic | inversion | all.
CommandResult cmd_validate(const ExperimentConfig& config, const std::string& suite);

const char* version_string();

}  // namespace irsp
