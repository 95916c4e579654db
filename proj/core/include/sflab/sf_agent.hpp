#pragma once

#include "sflab/agent.hpp"
#include "sflab/optim.hpp"
#include "sflab/policy.hpp"
#include "sflab/sf_critic.hpp"

namespace sflab::agent {

/// Universal successor-feature actor-critic with twin psi critics, GPI action
/// selection over task alternatives, and the multi-task losses. `Critic` is
/// SfaStack (stacked experts) or CollapsedSfCritic.
template <class Critic>
class SfAgent final : public Agent {
 public:
  SfAgent(const AgentConfig& config, const AgentDims& dims, Rng& rng);

  /// GPI over {w} and `alternatives`: one candidate per task from pi(s, task),
  /// scored by min over online twins of psi(s, b, w)^T w.
  Vector act(const Vector& s, const Vector& w, std::span<const Vector> alternatives, bool deterministic,
             Rng& rng) override;
  LossReport update(const Batch& batch, Rng& rng) override;
  LossReport evaluate_losses(const Batch& batch, Rng& rng) override;
  ParameterCount count_parameters() const override;
  nn::ParameterList state_parameters() override;
  const AgentConfig& config() const override { return config_; }
  const AgentDims& dims() const override { return dims_; }

  /// Index of the argmax over candidate scores (first on ties).
  static std::size_t gpi_pick(const Eigen::RowVectorXd& scores);
  /// Candidate actions (one per column) and their min-twin scores on w.
  Eigen::RowVectorXd gpi_scores(const Vector& s, const Vector& w, const Matrix& candidates) const;

  nn::SquashedGaussianPolicy& actor() { return actor_; }
  Critic& critic(int m) { return m == 0 ? psi1_ : psi2_; }
  Critic& target_critic(int m) { return m == 0 ? psi1_target_ : psi2_target_; }
  nn::TemperatureParam& temperature() { return temperature_; }
  SfCriticShape critic_shape() const;

 private:
  LossReport step(const Batch& batch, Rng& rng, bool apply);

  AgentConfig config_;
  AgentDims dims_;
  nn::SquashedGaussianPolicy actor_;
  Critic psi1_, psi2_, psi1_target_, psi2_target_;
  nn::TemperatureParam temperature_;
  nn::AdamState actor_adam_, psi1_adam_, psi2_adam_;
  long updates_ = 0;
};

using StackedSfAgent = SfAgent<SfaStack>;
using CollapsedSfAgent = SfAgent<CollapsedSfCritic>;

extern template class SfAgent<SfaStack>;
extern template class SfAgent<CollapsedSfCritic>;

/// Columns [X, X, ..., X] (`times` copies).
Matrix tile_columns(const Matrix& x, int times);

}  // namespace sflab::agent
