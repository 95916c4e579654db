#pragma once

#include <cmath>
#include <span>

#include "sflab/numnet.hpp"

namespace sflab::nn {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment accumulators, one pair per parameter tensor.
struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  long step = 0;

  AdamState() = default;
  AdamState(std::span<const Parameter* const> params, AdamConfig cfg);
};

/// Standard Adam update with bias correction, reading each parameter's grad.
void adam_step(std::span<Parameter* const> params, AdamState& state);

/// target <- (1 - rho) * target + rho * online.
void polyak_update(std::span<Parameter* const> target, std::span<const Parameter* const> online, double rho);

/// Copies online values into target (shapes must agree).
void hard_update(std::span<Parameter* const> target, std::span<const Parameter* const> online);

/// Entropy temperature tau = exp(log_tau), tuned towards a target entropy.
class TemperatureParam {
 public:
  TemperatureParam() = default;
  TemperatureParam(double initial_tau, double target_entropy, bool learnable, AdamConfig adam);

  double value() const { return std::exp(log_tau_.value(0, 0)); }
  double log_value() const { return log_tau_.value(0, 0); }
  double target_entropy() const { return target_entropy_; }
  bool learnable() const { return learnable_; }

  /// Loss -tau * sum(log_pi + target_entropy) / batch_size with log_pi held
  /// constant. Applies one Adam step on log_tau when `apply` is set and the
  /// parameter is learnable. Returns the loss value.
  double update(const Vector& log_prob, double batch_size, bool apply);

  Parameter& parameter() { return log_tau_; }
  const Parameter& parameter() const { return log_tau_; }

 private:
  Parameter log_tau_{"log_tau", 1, 1};
  double target_entropy_ = 0.0;
  bool learnable_ = true;
  AdamState adam_;
};

}  // namespace sflab::nn
