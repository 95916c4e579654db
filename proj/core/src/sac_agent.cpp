#include "sflab/sac_agent.hpp"

namespace sflab::agent {

namespace {

std::vector<int> critic_widths(int input, const AgentConfig& c) {
  std::vector<int> widths{input};
  if (!c.critic_hidden.empty()) {
    widths.insert(widths.end(), c.critic_hidden.begin(), c.critic_hidden.end());
    widths.push_back(1);
    return widths;
  }
  for (int k = 0; k < c.hidden_layers; ++k) widths.push_back(c.hidden_units);
  widths.push_back(1);
  return widths;
}

Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

SacAgent::SacAgent(const AgentConfig& config, const AgentDims& dims, Rng& rng) : config_(config), dims_(dims) {
  const int policy_in = dims.obs_dim + (config.type == AgentType::kGeneralist ? dims.feature_dim : 0);
  const nn::AdamConfig adam{config.learning_rate};
  actor_ = nn::SquashedGaussianPolicy(policy_in, dims.action_dim, config.hidden_units, config.hidden_layers,
                                      "actor", rng);
  const auto widths = critic_widths(policy_in + dims.action_dim, config);
  q1_ = nn::Mlp(widths, nn::Activation::kNone, "q1", rng);
  q2_ = nn::Mlp(widths, nn::Activation::kNone, "q2", rng);
  q1_target_ = nn::Mlp(widths, nn::Activation::kNone, "q1_target", rng);
  q2_target_ = nn::Mlp(widths, nn::Activation::kNone, "q2_target", rng);
  nn::hard_update(q1_target_.parameters(), q1_.parameters());
  nn::hard_update(q2_target_.parameters(), q2_.parameters());
  temperature_ = nn::TemperatureParam(config.initial_temperature, -static_cast<double>(dims.action_dim),
                                      config.learn_temperature, adam);
  actor_adam_ = nn::AdamState(actor_.parameters(), adam);
  q1_adam_ = nn::AdamState(q1_.parameters(), adam);
  q2_adam_ = nn::AdamState(q2_.parameters(), adam);
}

Vector SacAgent::act(const Vector& s, const Vector& w, std::span<const Vector>, bool deterministic, Rng& rng) {
  const Vector obs = observe_for_generalist(s, w, config_.type);
  return actor_.sample(obs, rng, deterministic).action.col(0);
}

LossReport SacAgent::update(const Batch& batch, Rng& rng) { return step(batch, rng, true); }

LossReport SacAgent::evaluate_losses(const Batch& batch, Rng& rng) { return step(batch, rng, false); }

LossReport SacAgent::step(const Batch& batch, Rng& rng, bool apply) {
  const Eigen::Index n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix obs = observe_for_generalist(batch.s, batch.w, config_.type);
  const Matrix obs_next = observe_for_generalist(batch.s_next, batch.w, config_.type);
  const Eigen::RowVectorXd reward = batch.phi.cwiseProduct(batch.w).colwise().sum();
  const double tau = temperature_.value();

  // Soft Bellman target from the target critics at s'.
  const nn::PolicySample next = actor_.sample(obs_next, rng, false);
  const Matrix next_in = stack_rows(obs_next, next.action);
  const Eigen::RowVectorXd next_q = q1_target_.forward(next_in).cwiseMin(q2_target_.forward(next_in));
  Eigen::RowVectorXd soft_next = next_q;
  if (tau != 0.0) soft_next -= tau * next.log_prob.transpose();
  const Eigen::RowVectorXd not_done = (1.0 - batch.done.array()).matrix().transpose();
  const Eigen::RowVectorXd y = reward + config_.gamma * not_done.cwiseProduct(soft_next);

  LossReport report;
  report.tau = tau;
  const Matrix q_in = stack_rows(obs, batch.a);
  nn::Mlp* critics[2] = {&q1_, &q2_};
  nn::AdamState* critic_adam[2] = {&q1_adam_, &q2_adam_};
  double* critic_loss[2] = {&report.critic1, &report.critic2};
  for (int m = 0; m < 2; ++m) {
    nn::MlpTape tape;
    const Eigen::RowVectorXd diff = critics[m]->forward(q_in, tape).row(0) - y;
    *critic_loss[m] = diff.squaredNorm() * inv_n;
    require_finite(*critic_loss[m], m == 0 ? "critic1 loss" : "critic2 loss");
    if (apply) {
      auto params = critics[m]->parameters();
      nn::zero_grad(params);
      critics[m]->backward(tape, (2.0 * inv_n) * diff, true);
      nn::adam_step(params, *critic_adam[m]);
    }
  }
  report.critic1_components = {report.critic1};
  report.critic2_components = {report.critic2};

  // Actor: tau * log pi - min over target critics.
  const nn::PolicySample cur = actor_.sample(obs, rng, false);
  const Matrix pi_in = stack_rows(obs, cur.action);
  nn::MlpTape t1, t2;
  const Eigen::RowVectorXd tq1 = q1_target_.forward(pi_in, t1).row(0);
  const Eigen::RowVectorXd tq2 = q2_target_.forward(pi_in, t2).row(0);
  const Eigen::RowVectorXd min_q = tq1.cwiseMin(tq2);
  report.actor = (tau * cur.log_prob.sum() - min_q.sum()) * inv_n;
  require_finite(report.actor, "actor loss");
  if (apply) {
    Eigen::RowVectorXd g1 = Eigen::RowVectorXd::Zero(n), g2 = Eigen::RowVectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) (tq1[j] <= tq2[j] ? g1 : g2)[j] = -inv_n;
    const Matrix d_in = q1_target_.backward(t1, g1, false) + q2_target_.backward(t2, g2, false);
    const Matrix d_action = d_in.bottomRows(dims_.action_dim);
    auto params = actor_.parameters();
    nn::zero_grad(params);
    actor_.backward(cur, d_action, Vector::Constant(n, tau * inv_n));
    nn::adam_step(params, actor_adam_);
  }

  report.temperature = temperature_.update(cur.log_prob, static_cast<double>(n), apply);
  require_finite(report.temperature, "temperature loss");

  if (apply) {
    ++updates_;
    if (updates_ % config_.target_update_interval == 0) {
      nn::polyak_update(q1_target_.parameters(), nn::as_const(q1_.parameters()), config_.polyak);
      nn::polyak_update(q2_target_.parameters(), nn::as_const(q2_.parameters()), config_.polyak);
    }
  }
  return report;
}

ParameterCount SacAgent::count_parameters() const {
  ParameterCount c;
  c.actor = nn::count(actor_.parameters());
  c.critics = nn::count(q1_.parameters()) + nn::count(q2_.parameters());
  c.temperature = config_.learn_temperature ? 1 : 0;
  return c;
}

nn::ParameterList SacAgent::state_parameters() {
  nn::ParameterList out = actor_.parameters();
  for (nn::Mlp* net : {&q1_, &q2_, &q1_target_, &q2_target_}) {
    auto p = net->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  out.push_back(&temperature_.parameter());
  return out;
}

}  // namespace sflab::agent
