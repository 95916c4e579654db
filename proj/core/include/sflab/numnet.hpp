#pragma once

// Dense networks with hand-written reverse-mode gradients.
//
// Batches are column-major: an input of shape (features x batch) holds one
// sample per column. Parameters carry their own gradient buffers; backward
// passes accumulate into them until zero_grad() is called.

#include <span>
#include <string>
#include <vector>

#include "sflab/types.hpp"

namespace sflab::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

using ParameterList = std::vector<Parameter*>;
using ConstParameterList = std::vector<const Parameter*>;

void zero_grad(std::span<Parameter* const> params);
std::size_t count(std::span<const Parameter* const> params);
bool all_finite(std::span<const Parameter* const> params);
ConstParameterList as_const(const ParameterList& params);

enum class Activation { kNone, kRelu };

/// y = W x + b.
class Linear {
 public:
  Linear() = default;
  Linear(int in, int out, const std::string& name);

  /// Uniform(-1/sqrt(in), 1/sqrt(in)) on weights and biases.
  void init_uniform(Rng& rng);

  Matrix forward(const Matrix& x) const;
  /// Returns dL/dx; accumulates dL/dW, dL/db when `param_grads` is set.
  Matrix backward(const Matrix& x, const Matrix& dy, bool param_grads);

  int in() const { return static_cast<int>(weight.value.cols()); }
  int out() const { return static_cast<int>(weight.value.rows()); }

  Parameter weight;
  Parameter bias;
};

/// Activations recorded by a forward pass; consumed by Mlp::backward.
struct MlpTape {
  std::vector<Matrix> inputs;   // input to layer k
  std::vector<Matrix> outputs;  // post-activation output of layer k
};

/// Multilayer perceptron: ReLU between layers, configurable output activation.
class Mlp {
 public:
  Mlp() = default;
  /// `widths` = {in, hidden..., out}; at least two entries.
  Mlp(std::vector<int> widths, Activation output_activation, const std::string& name, Rng& rng);

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, MlpTape& tape) const;
  Matrix backward(const MlpTape& tape, const Matrix& dy, bool param_grads = true);

  ParameterList parameters();
  ConstParameterList parameters() const;

  const std::vector<int>& widths() const { return widths_; }
  int input_size() const { return widths_.front(); }
  int output_size() const { return widths_.back(); }
  std::vector<Linear>& layers() { return layers_; }
  const std::vector<Linear>& layers() const { return layers_; }

  /// Closed-form count for a widths list: sum of in*out + out.
  static std::size_t parameter_count(std::span<const int> widths);

 private:
  bool activate(std::size_t layer) const;

  std::vector<int> widths_;
  Activation output_activation_ = Activation::kNone;
  std::vector<Linear> layers_;
};

}  // namespace sflab::nn
