#pragma once

#include "sflab/agent.hpp"
#include "sflab/optim.hpp"
#include "sflab/policy.hpp"

namespace sflab::agent {

/// Scalar-critic soft actor-critic with twin Q networks and their targets.
/// Rewards are reconstructed from each transition as phi^T w.
class SacAgent final : public Agent {
 public:
  SacAgent(const AgentConfig& config, const AgentDims& dims, Rng& rng);

  Vector act(const Vector& s, const Vector& w, std::span<const Vector> alternatives, bool deterministic,
             Rng& rng) override;
  LossReport update(const Batch& batch, Rng& rng) override;
  LossReport evaluate_losses(const Batch& batch, Rng& rng) override;
  ParameterCount count_parameters() const override;
  nn::ParameterList state_parameters() override;
  const AgentConfig& config() const override { return config_; }
  const AgentDims& dims() const override { return dims_; }

  int policy_input_dim() const { return actor_.input_dim(); }

  nn::SquashedGaussianPolicy& actor() { return actor_; }
  nn::Mlp& critic(int m) { return m == 0 ? q1_ : q2_; }
  nn::Mlp& target_critic(int m) { return m == 0 ? q1_target_ : q2_target_; }
  nn::TemperatureParam& temperature() { return temperature_; }

 private:
  LossReport step(const Batch& batch, Rng& rng, bool apply);

  AgentConfig config_;
  AgentDims dims_;
  nn::SquashedGaussianPolicy actor_;
  nn::Mlp q1_, q2_, q1_target_, q2_target_;
  nn::TemperatureParam temperature_;
  nn::AdamState actor_adam_, q1_adam_, q2_adam_;
  long updates_ = 0;
};

}  // namespace sflab::agent
