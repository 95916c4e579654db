#include "sflab/sf_agent.hpp"

namespace sflab::agent {

Matrix tile_columns(const Matrix& x, int times) {
  Matrix out(x.rows(), x.cols() * times);
  for (int k = 0; k < times; ++k) out.middleCols(k * x.cols(), x.cols()) = x;
  return out;
}

template <class Critic>
SfAgent<Critic>::SfAgent(const AgentConfig& config, const AgentDims& dims, Rng& rng)
    : config_(config), dims_(dims) {
  const int policy_in = dims.obs_dim + (config.type == AgentType::kGeneralist ? dims.feature_dim : 0);
  const nn::AdamConfig adam{config.learning_rate};
  actor_ = nn::SquashedGaussianPolicy(policy_in, dims.action_dim, config.hidden_units, config.hidden_layers,
                                      "actor", rng);
  const SfCriticShape shape = critic_shape();
  psi1_ = Critic(shape, "psi1", rng);
  psi2_ = Critic(shape, "psi2", rng);
  psi1_target_ = Critic(shape, "psi1_target", rng);
  psi2_target_ = Critic(shape, "psi2_target", rng);
  nn::hard_update(psi1_target_.parameters(), psi1_.parameters());
  nn::hard_update(psi2_target_.parameters(), psi2_.parameters());
  temperature_ = nn::TemperatureParam(config.initial_temperature, -static_cast<double>(dims.action_dim),
                                      config.learn_temperature, adam);
  actor_adam_ = nn::AdamState(actor_.parameters(), adam);
  psi1_adam_ = nn::AdamState(psi1_.parameters(), adam);
  psi2_adam_ = nn::AdamState(psi2_.parameters(), adam);
}

template <class Critic>
SfCriticShape SfAgent<Critic>::critic_shape() const {
  return SfCriticShape{dims_.obs_dim,          dims_.action_dim,       dims_.feature_dim,
                       config_.encoder_units, config_.encoder_layers, config_.output_layers};
}

template <class Critic>
std::size_t SfAgent<Critic>::gpi_pick(const Eigen::RowVectorXd& scores) {
  if (scores.size() == 0) throw Error("gpi_pick: no candidates");
  std::size_t best = 0;
  for (Eigen::Index k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(k);
  }
  return best;
}

template <class Critic>
Eigen::RowVectorXd SfAgent<Critic>::gpi_scores(const Vector& s, const Vector& w, const Matrix& candidates) const {
  const int n = static_cast<int>(candidates.cols());
  const Matrix s_rep = tile_columns(s, n);
  const Matrix w_rep = tile_columns(w, n);
  const Eigen::RowVectorXd q1 = q_from_psi(psi1_.forward(s_rep, candidates, w_rep), w_rep);
  const Eigen::RowVectorXd q2 = q_from_psi(psi2_.forward(s_rep, candidates, w_rep), w_rep);
  return q1.cwiseMin(q2);
}

template <class Critic>
Vector SfAgent<Critic>::act(const Vector& s, const Vector& w, std::span<const Vector> alternatives,
                            bool deterministic, Rng& rng) {
  const int tasks = 1 + static_cast<int>(alternatives.size());
  Matrix task_matrix(w.size(), tasks);
  task_matrix.col(0) = w;
  for (int i = 1; i < tasks; ++i) task_matrix.col(i) = alternatives[static_cast<std::size_t>(i - 1)];
  const Matrix obs = observe_for_generalist(tile_columns(s, tasks), task_matrix, config_.type);
  const Matrix candidates = actor_.sample(obs, rng, deterministic).action;
  if (tasks == 1) return candidates.col(0);
  return candidates.col(static_cast<Eigen::Index>(gpi_pick(gpi_scores(s, w, candidates))));
}

template <class Critic>
LossReport SfAgent<Critic>::update(const Batch& batch, Rng& rng) {
  return step(batch, rng, true);
}

template <class Critic>
LossReport SfAgent<Critic>::evaluate_losses(const Batch& batch, Rng& rng) {
  return step(batch, rng, false);
}

template <class Critic>
LossReport SfAgent<Critic>::step(const Batch& batch, Rng& rng, bool apply) {
  const Eigen::Index b = batch.size();
  const int n_alt = config_.n_alternatives;
  if (static_cast<int>(batch.alternatives.size()) < n_alt) {
    throw DimensionError("batch holds fewer task alternatives than configured");
  }
  const int tasks = 1 + n_alt;
  const double inv_b = 1.0 / static_cast<double>(b);

  // Task i occupies columns [i*B, (i+1)*B): task 0 is the stored w.
  Matrix task(dims_.feature_dim, b * tasks);
  task.leftCols(b) = batch.w;
  for (int i = 1; i < tasks; ++i) task.middleCols(i * b, b) = batch.alternatives[static_cast<std::size_t>(i - 1)];
  const Matrix s = tile_columns(batch.s, tasks);
  const Matrix s_next = tile_columns(batch.s_next, tasks);
  const Matrix a = tile_columns(batch.a, tasks);
  const Matrix phi = tile_columns(batch.phi, tasks);
  const Eigen::RowVectorXd not_done =
      tile_columns((1.0 - batch.done.array()).matrix().transpose(), tasks).row(0);
  const Matrix obs = observe_for_generalist(s, task, config_.type);
  const Matrix obs_next = observe_for_generalist(s_next, task, config_.type);
  const double tau = temperature_.value();

  LossReport report;
  report.tau = tau;

  // psi targets: each twin bootstraps from its own target stack.
  const nn::PolicySample next = actor_.sample(obs_next, rng, false);
  Critic* online[2] = {&psi1_, &psi2_};
  Critic* target[2] = {&psi1_target_, &psi2_target_};
  nn::AdamState* adam[2] = {&psi1_adam_, &psi2_adam_};
  double* loss[2] = {&report.critic1, &report.critic2};
  std::vector<double>* components[2] = {&report.critic1_components, &report.critic2_components};
  for (int m = 0; m < 2; ++m) {
    Matrix y = target[m]->forward(s_next, next.action, task);
    y = phi + config_.gamma * (y.array().rowwise() * not_done.array()).matrix();
    typename Critic::Tape tape;
    const Matrix diff = online[m]->forward(s, a, task, tape) - y;
    const Vector per_component = diff.rowwise().squaredNorm() * inv_b;
    components[m]->assign(per_component.data(), per_component.data() + per_component.size());
    *loss[m] = per_component.sum();
    require_finite(*loss[m], m == 0 ? "psi1 loss" : "psi2 loss");
    if (apply) {
      auto params = online[m]->parameters();
      nn::zero_grad(params);
      online[m]->backward(tape, (2.0 * inv_b) * diff, true);
      nn::adam_step(params, *adam[m]);
    }
  }

  // Actor: the scalar Q = psi^T task from the target twins drives the policy.
  const nn::PolicySample cur = actor_.sample(obs, rng, false);
  const Matrix q_task = config_.actor_q_on_true_task ? tile_columns(batch.w, tasks) : task;
  typename Critic::Tape t1, t2;
  const Eigen::RowVectorXd q1 = q_from_psi(psi1_target_.forward(s, cur.action, q_task, t1), q_task);
  const Eigen::RowVectorXd q2 = q_from_psi(psi2_target_.forward(s, cur.action, q_task, t2), q_task);
  report.actor = (tau * cur.log_prob.sum() - q1.cwiseMin(q2).sum()) * inv_b;
  require_finite(report.actor, "actor loss");
  if (apply) {
    const Eigen::Index n = cur.action.cols();
    Eigen::RowVectorXd g1 = Eigen::RowVectorXd::Zero(n), g2 = Eigen::RowVectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) (q1[j] <= q2[j] ? g1 : g2)[j] = -inv_b;
    const Matrix dpsi1 = q_task.array().rowwise() * g1.array();
    const Matrix dpsi2 = q_task.array().rowwise() * g2.array();
    const Matrix d_action =
        psi1_target_.backward(t1, dpsi1, false).a + psi2_target_.backward(t2, dpsi2, false).a;
    auto params = actor_.parameters();
    nn::zero_grad(params);
    actor_.backward(cur, d_action, Vector::Constant(n, tau * inv_b));
    nn::adam_step(params, actor_adam_);
  }

  report.temperature = temperature_.update(cur.log_prob, static_cast<double>(cur.log_prob.size()), apply);
  require_finite(report.temperature, "temperature loss");

  if (apply) {
    ++updates_;
    if (updates_ % config_.target_update_interval == 0) {
      nn::polyak_update(psi1_target_.parameters(), nn::as_const(psi1_.parameters()), config_.polyak);
      nn::polyak_update(psi2_target_.parameters(), nn::as_const(psi2_.parameters()), config_.polyak);
    }
  }
  return report;
}

template <class Critic>
ParameterCount SfAgent<Critic>::count_parameters() const {
  ParameterCount c;
  c.actor = nn::count(actor_.parameters());
  c.critics = nn::count(psi1_.parameters()) + nn::count(psi2_.parameters());
  c.temperature = config_.learn_temperature ? 1 : 0;
  return c;
}

template <class Critic>
nn::ParameterList SfAgent<Critic>::state_parameters() {
  nn::ParameterList out = actor_.parameters();
  for (Critic* c : {&psi1_, &psi2_, &psi1_target_, &psi2_target_}) {
    auto p = c->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  out.push_back(&temperature_.parameter());
  return out;
}

template class SfAgent<SfaStack>;
template class SfAgent<CollapsedSfCritic>;

}  // namespace sflab::agent
