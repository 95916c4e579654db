#include "sflab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sflab::nn {

namespace {

constexpr double kActionBound = 1.0 - 1e-12;

double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }

std::vector<int> trunk_widths(int input_dim, int action_dim, int hidden_units, int hidden_layers) {
  std::vector<int> widths{input_dim};
  for (int k = 0; k < hidden_layers; ++k) widths.push_back(hidden_units);
  widths.push_back(2 * action_dim);
  return widths;
}

}  // namespace

double log_one_minus_tanh_sq(double u) { return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u)); }

SquashedGaussianPolicy::SquashedGaussianPolicy(int input_dim, int action_dim, int hidden_units,
                                               int hidden_layers, const std::string& name, Rng& rng)
    : action_dim_(action_dim),
      trunk_(trunk_widths(input_dim, action_dim, hidden_units, hidden_layers), Activation::kNone, name, rng) {}

PolicySample SquashedGaussianPolicy::sample(const Matrix& input, Rng& rng, bool deterministic) const {
  Matrix noise = Matrix::Zero(action_dim_, input.cols());
  if (!deterministic) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < noise.cols(); ++j) {
      for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = normal(rng);
    }
  }
  return sample_with_noise(input, noise);
}

PolicySample SquashedGaussianPolicy::sample_with_noise(const Matrix& input, const Matrix& noise) const {
  require_dims(noise.rows(), action_dim_, "policy noise rows");
  require_dims(noise.cols(), input.cols(), "policy noise cols");
  PolicySample out;
  const Matrix head = trunk_.forward(input, out.tape);
  const Eigen::Index n = input.cols();
  out.mean = head.topRows(action_dim_);
  const Matrix raw_log_std = head.bottomRows(action_dim_);
  out.log_std = raw_log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  out.log_std_clamped = (raw_log_std.array() < kLogStdMin) || (raw_log_std.array() > kLogStdMax);
  out.noise = noise;
  out.pre_tanh = out.mean.array() + out.log_std.array().exp() * noise.array();
  out.action.resize(action_dim_, n);
  out.log_prob = Vector::Zero(n);
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  for (Eigen::Index j = 0; j < n; ++j) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < action_dim_; ++i) {
      const double u = out.pre_tanh(i, j);
      out.action(i, j) = std::clamp(std::tanh(u), -kActionBound, kActionBound);
      lp += -0.5 * noise(i, j) * noise(i, j) - out.log_std(i, j) - half_log_two_pi - log_one_minus_tanh_sq(u);
    }
    out.log_prob[j] = lp;
  }
  return out;
}

void SquashedGaussianPolicy::backward(const PolicySample& s, const Matrix& d_action, const Vector& d_log_prob) {
  const Eigen::Index n = s.action.cols();
  require_dims(d_action.cols(), n, "policy backward d_action");
  require_dims(d_log_prob.size(), n, "policy backward d_log_prob");
  Matrix d_head(2 * action_dim_, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < action_dim_; ++i) {
      const double t = std::tanh(s.pre_tanh(i, j));
      const double g_u = d_action(i, j) * (1.0 - t * t) + d_log_prob[j] * 2.0 * t;
      d_head(i, j) = g_u;
      double g_ls = g_u * std::exp(s.log_std(i, j)) * s.noise(i, j) - d_log_prob[j];
      if (s.log_std_clamped(i, j)) g_ls = 0.0;
      d_head(action_dim_ + i, j) = g_ls;
    }
  }
  trunk_.backward(s.tape, d_head, true);
}

}  // namespace sflab::nn
