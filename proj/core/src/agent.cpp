#include "sflab/agent.hpp"

#include <cmath>

#include "sflab/sac_agent.hpp"
#include "sflab/sf_agent.hpp"

namespace sflab::agent {

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kSac:
      return "SAC";
    case Architecture::kStacked:
      return "SUSFAS";
    case Architecture::kCollapsed:
      return "CUSFAS";
  }
  return "?";
}

std::string to_string(AgentType type) { return type == AgentType::kSpecialist ? "specialist" : "generalist"; }

Vector observe_for_generalist(const Vector& s, const Vector& w, AgentType type) {
  if (type == AgentType::kSpecialist) return s;
  Vector out(s.size() + w.size());
  out << s, w;
  return out;
}

Matrix observe_for_generalist(const Matrix& s, const Matrix& w, AgentType type) {
  if (type == AgentType::kSpecialist) return s;
  require_dims(w.cols(), s.cols(), "observe_for_generalist batch");
  Matrix out(s.rows() + w.rows(), s.cols());
  out << s, w;
  return out;
}

nn::Checkpoint Agent::checkpoint(std::map<std::string, std::string> metadata) {
  metadata["architecture"] = to_string(config().architecture);
  metadata["agent_type"] = to_string(config().type);
  metadata["obs_dim"] = std::to_string(dims().obs_dim);
  metadata["action_dim"] = std::to_string(dims().action_dim);
  metadata["feature_dim"] = std::to_string(dims().feature_dim);
  return nn::make_checkpoint(nn::as_const(state_parameters()), std::move(metadata));
}

void Agent::restore(const nn::Checkpoint& checkpoint) {
  auto params = state_parameters();
  nn::restore_checkpoint(checkpoint, params);
}

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const AgentDims& dims, Rng& rng) {
  if (dims.obs_dim <= 0 || dims.action_dim <= 0 || dims.feature_dim <= 0) {
    throw DimensionError("make_agent: dimensions must be positive");
  }
  switch (config.architecture) {
    case Architecture::kSac:
      return std::make_unique<SacAgent>(config, dims, rng);
    case Architecture::kStacked:
      return std::make_unique<StackedSfAgent>(config, dims, rng);
    case Architecture::kCollapsed:
      return std::make_unique<CollapsedSfAgent>(config, dims, rng);
  }
  throw Error("make_agent: unknown architecture");
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw NonFiniteError(std::string("non-finite ") + what);
}

}  // namespace sflab::agent
