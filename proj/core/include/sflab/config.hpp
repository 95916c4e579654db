#pragma once
// Experiment configuration and its text format.
//
// Files hold `key = value` lines grouped under `[section]` headers; `#` starts
// a comment. Every key is addressable as `section.key` in overrides, and as
// SFLAB__SECTION__KEY in the environment.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sflab/agent.hpp"
#include "sflab/environment.hpp"

namespace sflab::harness {

inline constexpr const char* kEnvPrefix = "SFLAB__";

struct TrainConfig {
  std::size_t buffer_size = 1'000'000;
  int batch_size = 256;
  long warmup_steps = 10'000;
  long total_steps = 10'000'000;
  long eval_interval = 50'000;
  int eval_episodes = 10;
  std::vector<int> seeds{0, 1, 2, 3, 4, 5};
  std::uint64_t root_seed = 0;
  long loss_log_interval = 1'000;
  bool checkpoints = true;
  int jobs = 1;
  bool traces = false;
};

struct ExperimentConfig {
  std::string name;  // empty: derived from architecture, RTA mode and agent type
  env::EnvOptions env;
  agent::AgentConfig agent;
  double weight_low = 0.0;
  double weight_high = 1.0;
  int n_z = -1;  // -1: 2 for generalists, 0 for specialists
  double z_stddev = 0.1;
  TrainConfig train;

  std::string label() const;
  int resolved_n_z() const;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parses config text on top of `base`.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});

/// Defaults, then the file (if any), then environment pairs, then `key=value`
/// overrides; validated at the end.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides,
                             const std::vector<std::pair<std::string, std::string>>& env_overrides = {});

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Splits "section.key=value" and applies it.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Throws ConfigError naming the first out-of-range key.
void validate(const ExperimentConfig& cfg);

/// Every key with its resolved value, in file syntax; parse_config round-trips it.
std::string snapshot(const ExperimentConfig& cfg);

std::vector<std::string> config_keys();

/// SFLAB__TRAIN__GAMMA=0.5 becomes {"train.gamma", "0.5"}.
std::vector<std::pair<std::string, std::string>> env_overrides_from(char** envp);

std::string format_double(double v);

}  // namespace sflab::harness
