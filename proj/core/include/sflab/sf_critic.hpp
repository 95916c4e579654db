#pragma once
// Successor-feature critics over (s, a, w) batches.
//
// Both critic kinds map column-major inputs s (obs x B), a (act x B) and
// w (d x B) to psi (d x B). A stacked critic owns one parameter-disjoint
// block per feature; the collapsed critic shares every layer.

#include <string>
#include <vector>

#include "sflab/numnet.hpp"

namespace sflab::agent {

struct SfCriticShape {
  int obs_dim = 0;
  int action_dim = 0;
  int feature_dim = 0;
  int encoder_units = 256;
  int encoder_layers = 1;
  int output_layers = 2;
};

/// Gradients of a critic's output with respect to its three inputs.
struct SfInputGrads {
  Matrix s;
  Matrix a;
  Matrix w;
};

struct EncoderTape {
  nn::MlpTape state, action, weight, output;
};

/// State, action and weight encoders whose concatenated outputs feed an output
/// encoder with `outputs` scalar heads.
class EncoderNet {
 public:
  using Tape = EncoderTape;

  EncoderNet() = default;
  EncoderNet(const SfCriticShape& shape, int outputs, const std::string& name, Rng& rng);

  Matrix forward(const Matrix& s, const Matrix& a, const Matrix& w) const;
  Matrix forward(const Matrix& s, const Matrix& a, const Matrix& w, EncoderTape& tape) const;
  SfInputGrads backward(const EncoderTape& tape, const Matrix& dy, bool param_grads);

  nn::ParameterList parameters();
  nn::ConstParameterList parameters() const;
  static std::size_t parameter_count(const SfCriticShape& shape, int outputs);

  nn::Mlp& state_encoder() { return state_; }
  nn::Mlp& action_encoder() { return action_; }
  nn::Mlp& weight_encoder() { return weight_; }
  nn::Mlp& output_encoder() { return output_; }

 private:
  nn::Mlp state_, action_, weight_, output_;
};

/// One expert block: predicts a single successor feature.
using SfaBlock = EncoderNet;

/// d parameter-disjoint blocks; row i of the output comes from block i only.
class SfaStack {
 public:
  using Tape = std::vector<EncoderTape>;

  SfaStack() = default;
  SfaStack(const SfCriticShape& shape, const std::string& name, Rng& rng);

  Matrix forward(const Matrix& s, const Matrix& a, const Matrix& w) const;
  Matrix forward(const Matrix& s, const Matrix& a, const Matrix& w, Tape& tape) const;
  /// dpsi is d x B; block i only sees row i.
  SfInputGrads backward(const Tape& tape, const Matrix& dpsi, bool param_grads);

  nn::ParameterList parameters();
  nn::ConstParameterList parameters() const;
  int feature_dim() const { return static_cast<int>(blocks_.size()); }
  SfaBlock& block(int i) { return blocks_.at(static_cast<std::size_t>(i)); }
  const SfaBlock& block(int i) const { return blocks_.at(static_cast<std::size_t>(i)); }

  static std::size_t parameter_count(const SfCriticShape& shape);

 private:
  std::vector<SfaBlock> blocks_;
};

/// Shared encoders and trunk with a d-dimensional head.
class CollapsedSfCritic {
 public:
  using Tape = EncoderTape;

  CollapsedSfCritic() = default;
  CollapsedSfCritic(const SfCriticShape& shape, const std::string& name, Rng& rng);

  Matrix forward(const Matrix& s, const Matrix& a, const Matrix& w) const { return net_.forward(s, a, w); }
  Matrix forward(const Matrix& s, const Matrix& a, const Matrix& w, Tape& tape) const {
    return net_.forward(s, a, w, tape);
  }
  SfInputGrads backward(const Tape& tape, const Matrix& dpsi, bool param_grads) {
    return net_.backward(tape, dpsi, param_grads);
  }

  nn::ParameterList parameters() { return net_.parameters(); }
  nn::ConstParameterList parameters() const { return net_.parameters(); }
  int feature_dim() const { return feature_dim_; }
  EncoderNet& net() { return net_; }

  static std::size_t parameter_count(const SfCriticShape& shape);

 private:
  EncoderNet net_;
  int feature_dim_ = 0;
};

/// Column-wise psi^T w.
Eigen::RowVectorXd q_from_psi(const Matrix& psi, const Matrix& w);
double q_from_psi(const Vector& psi, const Vector& w);

}  // namespace sflab::agent
