#pragma once

#include "sflab/numnet.hpp"

namespace sflab::nn {

/// Result of a policy pass over a batch, kept for the backward pass.
struct PolicySample {
  Matrix action;     // tanh(pre_tanh), strictly inside (-1, 1)
  Vector log_prob;   // one entry per column, includes the tanh Jacobian
  Matrix mean;
  Matrix log_std;    // after clamping
  Matrix noise;      // standard-normal draws (zero in deterministic mode)
  Matrix pre_tanh;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> log_std_clamped;
  MlpTape tape;
};

/// Gaussian policy squashed through tanh. The trunk outputs 2*action_dim rows:
/// the first half is the mean, the second half the log standard deviation.
class SquashedGaussianPolicy {
 public:
  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;

  SquashedGaussianPolicy() = default;
  SquashedGaussianPolicy(int input_dim, int action_dim, int hidden_units, int hidden_layers,
                         const std::string& name, Rng& rng);

  /// Reparameterized sample. In deterministic mode the noise is zero, so the
  /// action is tanh(mean) and no random numbers are consumed.
  PolicySample sample(const Matrix& input, Rng& rng, bool deterministic) const;
  /// Sample with externally supplied standard-normal noise (action_dim x batch).
  PolicySample sample_with_noise(const Matrix& input, const Matrix& noise) const;

  /// Accumulates parameter gradients given dL/daction and dL/dlog_prob.
  void backward(const PolicySample& sample, const Matrix& d_action, const Vector& d_log_prob);

  int input_dim() const { return trunk_.input_size(); }
  int action_dim() const { return action_dim_; }

  Mlp& trunk() { return trunk_; }
  const Mlp& trunk() const { return trunk_; }
  ParameterList parameters() { return trunk_.parameters(); }
  ConstParameterList parameters() const { return trunk_.parameters(); }

 private:
  int action_dim_ = 0;
  Mlp trunk_;
};

/// log(1 - tanh(u)^2) evaluated without cancellation for large |u|.
double log_one_minus_tanh_sq(double u);

}  // namespace sflab::nn
