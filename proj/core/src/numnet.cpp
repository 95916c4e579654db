#include "sflab/numnet.hpp"

#include <cmath>

namespace sflab::nn {

void zero_grad(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

std::size_t count(std::span<const Parameter* const> params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += static_cast<std::size_t>(p->size());
  return n;
}

bool all_finite(std::span<const Parameter* const> params) {
  for (const Parameter* p : params) {
    if (!p->value.allFinite()) return false;
  }
  return true;
}

ConstParameterList as_const(const ParameterList& params) { return {params.begin(), params.end()}; }

Linear::Linear(int in, int out, const std::string& name)
    : weight(name + ".weight", out, in), bias(name + ".bias", out, 1) {
  if (in <= 0 || out <= 0) throw DimensionError("Linear: sizes must be positive");
}

void Linear::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < weight.value.size(); ++i) weight.value.data()[i] = dist(rng);
  for (Eigen::Index i = 0; i < bias.value.size(); ++i) bias.value.data()[i] = dist(rng);
}

Matrix Linear::forward(const Matrix& x) const {
  require_dims(x.rows(), in(), "Linear::forward input");
  Matrix y(out(), x.cols());
  y.noalias() = weight.value * x;
  y.colwise() += bias.value.col(0);
  return y;
}

Matrix Linear::backward(const Matrix& x, const Matrix& dy, bool param_grads) {
  if (param_grads) {
    weight.grad.noalias() += dy * x.transpose();
    bias.grad.col(0) += dy.rowwise().sum();
  }
  Matrix dx(in(), dy.cols());
  dx.noalias() = weight.value.transpose() * dy;
  return dx;
}

Mlp::Mlp(std::vector<int> widths, Activation output_activation, const std::string& name, Rng& rng)
    : widths_(std::move(widths)), output_activation_(output_activation) {
  if (widths_.size() < 2) throw DimensionError("Mlp: need at least input and output widths");
  layers_.reserve(widths_.size() - 1);
  for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
    layers_.emplace_back(widths_[k], widths_[k + 1], name + "." + std::to_string(k));
    layers_.back().init_uniform(rng);
  }
}

bool Mlp::activate(std::size_t layer) const {
  return layer + 1 < layers_.size() || output_activation_ == Activation::kRelu;
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    h = layers_[k].forward(h);
    if (activate(k)) h = h.cwiseMax(0.0);
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x, MlpTape& tape) const {
  tape.inputs.resize(layers_.size());
  tape.outputs.resize(layers_.size());
  const Matrix* h = &x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    tape.inputs[k] = *h;
    tape.outputs[k] = layers_[k].forward(*h);
    if (activate(k)) tape.outputs[k] = tape.outputs[k].cwiseMax(0.0);
    h = &tape.outputs[k];
  }
  return *h;
}

Matrix Mlp::backward(const MlpTape& tape, const Matrix& dy, bool param_grads) {
  require_dims(static_cast<Eigen::Index>(tape.inputs.size()), static_cast<Eigen::Index>(layers_.size()),
               "Mlp::backward tape");
  Matrix g = dy;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (activate(k)) g = (tape.outputs[k].array() > 0.0).select(g.array(), 0.0).matrix();
    g = layers_[k].backward(tape.inputs[k], g, param_grads);
  }
  return g;
}

ParameterList Mlp::parameters() {
  ParameterList out;
  for (Linear& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

ConstParameterList Mlp::parameters() const {
  ConstParameterList out;
  for (const Linear& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t Mlp::parameter_count(std::span<const int> widths) {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    n += static_cast<std::size_t>(widths[k]) * static_cast<std::size_t>(widths[k + 1]) +
         static_cast<std::size_t>(widths[k + 1]);
  }
  return n;
}

}  // namespace sflab::nn
