#include "sflab/optim.hpp"

#include <cmath>

namespace sflab::nn {

AdamState::AdamState(std::span<const Parameter* const> params, AdamConfig cfg) : config(cfg) {
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const Parameter* p : params) {
    first_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    second_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  require_dims(static_cast<Eigen::Index>(params.size()), static_cast<Eigen::Index>(state.first_moment.size()),
               "adam_step parameter count");
  ++state.step;
  const auto& c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Matrix& m = state.first_moment[k];
    Matrix& v = state.second_moment[k];
    require_dims(m.size(), p.size(), "adam_step moment shape");
    m = c.beta1 * m + (1.0 - c.beta1) * p.grad;
    v = c.beta2 * v + (1.0 - c.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= c.learning_rate * (m.array() / correction1) /
                       ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

void polyak_update(std::span<Parameter* const> target, std::span<const Parameter* const> online, double rho) {
  require_dims(static_cast<Eigen::Index>(target.size()), static_cast<Eigen::Index>(online.size()),
               "polyak_update parameter count");
  for (std::size_t k = 0; k < target.size(); ++k) {
    require_dims(target[k]->size(), online[k]->size(), "polyak_update shape");
    target[k]->value = (1.0 - rho) * target[k]->value + rho * online[k]->value;
  }
}

void hard_update(std::span<Parameter* const> target, std::span<const Parameter* const> online) {
  require_dims(static_cast<Eigen::Index>(target.size()), static_cast<Eigen::Index>(online.size()),
               "hard_update parameter count");
  for (std::size_t k = 0; k < target.size(); ++k) {
    require_dims(target[k]->size(), online[k]->size(), "hard_update shape");
    target[k]->value = online[k]->value;
  }
}

TemperatureParam::TemperatureParam(double initial_tau, double target_entropy, bool learnable, AdamConfig adam)
    : target_entropy_(target_entropy), learnable_(learnable) {
  if (initial_tau < 0.0) throw Error("temperature must be non-negative");
  if (learnable && initial_tau <= 0.0) throw Error("learnable temperature must start positive");
  log_tau_.value(0, 0) = std::log(initial_tau);
  const Parameter* p = &log_tau_;
  adam_ = AdamState(std::span<const Parameter* const>(&p, 1), adam);
}

double TemperatureParam::update(const Vector& log_prob, double batch_size, bool apply) {
  if (!learnable_) return 0.0;
  const double tau = value();
  const double loss = -tau * (log_prob.array() + target_entropy_).sum() / batch_size;
  if (apply) {
    log_tau_.grad(0, 0) = loss;  // d(-tau * x)/d(log tau) = -tau * x
    Parameter* p = &log_tau_;
    adam_step(std::span<Parameter* const>(&p, 1), adam_);
    log_tau_.zero_grad();
  }
  return loss;
}

}  // namespace sflab::nn
