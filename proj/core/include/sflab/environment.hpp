#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sflab/types.hpp"

namespace sflab::env {

/// How the secondary controller participates in an experiment.
enum class RtaMode { kOff, kOn, kOnWithoutPenalty };

std::string to_string(RtaMode mode);
RtaMode parse_rta_mode(const std::string& text);

struct EnvSpec {
  std::string id;
  int obs_dim = 0;
  int action_dim = 0;
  std::vector<std::string> feature_names;
  std::vector<bool> tunable;
  /// Index of the controller-activation penalty feature, -1 if the
  /// environment has none.
  int penalty_feature = -1;

  int feature_dim() const { return static_cast<int>(feature_names.size()); }
};

struct StepResult {
  Vector obs;
  Vector phi;
  bool terminal = false;   // absorbing: no bootstrapping past this step
  bool truncated = false;  // time limit
  bool intervened = false;
  Vector proposed_action;  // agent output
  Vector executed_action;  // after the secondary controller, physical units
  double delta_v = 0.0;
  double fuel_reward = 0.0;
  double task_reward = 0.0;  // inspection reward; zero for the lander
  bool success = false;

  bool done() const { return terminal || truncated; }
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual Vector reset(Rng& rng) = 0;
  /// Agent action in [-1, 1]^action_dim. Throws once the episode is over.
  virtual StepResult step(const Vector& action) = 0;
  virtual void set_controller_enabled(bool enabled) = 0;
  virtual bool controller_enabled() const = 0;

  /// Episode trace support: column names and one row for the last step.
  virtual std::vector<std::string> trace_columns() const = 0;
  virtual std::vector<double> trace_row(const StepResult& result) const = 0;
};

struct EnvOptions {
  std::string id = "lander";
  std::string preset = "default";
  RtaMode rta = RtaMode::kOn;
  int max_steps = 0;  // 0 keeps the environment's own limit
};

std::unique_ptr<Environment> make_environment(const EnvOptions& options);

}  // namespace sflab::env
