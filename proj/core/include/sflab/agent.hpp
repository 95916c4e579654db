#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sflab/checkpoint.hpp"
#include "sflab/numnet.hpp"
#include "sflab/replay.hpp"

namespace sflab::agent {

enum class Architecture { kSac, kStacked, kCollapsed };
enum class AgentType { kSpecialist, kGeneralist };

std::string to_string(Architecture arch);
std::string to_string(AgentType type);

/// Observation, action and feature sizes an agent is built for.
struct AgentDims {
  int obs_dim = 0;      // environment observation, without task weights
  int action_dim = 0;
  int feature_dim = 0;  // d
};

struct AgentConfig {
  Architecture architecture = Architecture::kStacked;
  AgentType type = AgentType::kGeneralist;

  int hidden_units = 256;   // actor and SAC critic width
  int hidden_layers = 2;
  /// Explicit SAC critic hidden widths; replaces hidden_units x hidden_layers when non-empty.
  std::vector<int> critic_hidden;
  int encoder_units = 256;  // SF critic encoder width
  int encoder_layers = 1;   // h_state = h_action = h_weight
  int output_layers = 2;    // h_psi

  double learning_rate = 3e-4;
  double gamma = 0.99;
  double polyak = 0.005;   // fraction moved toward online per target update
  int target_update_interval = 1;
  int gradient_steps = 1;

  double initial_temperature = 1.0;
  bool learn_temperature = true;

  int n_alternatives = 0;  // n_z stored per transition
  /// Actor loss Q term on the true task w instead of the alternative task.
  bool actor_q_on_true_task = false;
};

/// Loss values from one update. Critic components are per feature for SF
/// critics and a single entry for scalar critics.
struct LossReport {
  double actor = 0.0;
  double critic1 = 0.0;
  double critic2 = 0.0;
  double temperature = 0.0;
  double tau = 0.0;
  std::vector<double> critic1_components;
  std::vector<double> critic2_components;
};

/// Parameter-count breakdown (online networks only, no target copies).
struct ParameterCount {
  std::size_t actor = 0;
  std::size_t critics = 0;
  std::size_t temperature = 0;

  std::size_t total() const { return actor + critics + temperature; }
};

/// Observation fed to networks: generalists see s followed by w, specialists s only.
Vector observe_for_generalist(const Vector& s, const Vector& w, AgentType type);
Matrix observe_for_generalist(const Matrix& s, const Matrix& w, AgentType type);

class Agent {
 public:
  virtual ~Agent() = default;

  /// Stochastic in training, tanh(mean) when `deterministic`; deterministic
  /// mode consumes no random numbers.
  virtual Vector act(const Vector& s, const Vector& w, std::span<const Vector> alternatives, bool deterministic,
                     Rng& rng) = 0;

  /// Computes the losses on `batch` and applies one optimization step.
  virtual LossReport update(const Batch& batch, Rng& rng) = 0;
  /// Same losses as update() without touching any parameter.
  virtual LossReport evaluate_losses(const Batch& batch, Rng& rng) = 0;

  virtual ParameterCount count_parameters() const = 0;

  /// Every tensor needed to restore the agent (online, targets, temperature).
  virtual nn::ParameterList state_parameters() = 0;

  virtual const AgentConfig& config() const = 0;
  virtual const AgentDims& dims() const = 0;

  nn::Checkpoint checkpoint(std::map<std::string, std::string> metadata = {});
  void restore(const nn::Checkpoint& checkpoint);
};

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const AgentDims& dims, Rng& rng);

/// Throws NonFiniteError naming `what` unless `value` is finite.
void require_finite(double value, const char* what);

}  // namespace sflab::agent
