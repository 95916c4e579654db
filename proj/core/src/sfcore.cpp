#include "sflab/sfcore.hpp"

#include <algorithm>
#include <numeric>

namespace sflab::sf {

TaskWeights TaskWeights::all_tunable(Vector values) {
  TaskWeights w;
  w.tunable.assign(static_cast<std::size_t>(values.size()), true);
  w.values = std::move(values);
  return w;
}

TaskWeights TaskWeights::constant(Eigen::Index d, double value, std::vector<bool> tunable) {
  require_dims(static_cast<Eigen::Index>(tunable.size()), d, "TaskWeights::constant mask");
  return TaskWeights{Vector::Constant(d, value), std::move(tunable)};
}

void validate(const TaskWeights& w) {
  require_dims(static_cast<Eigen::Index>(w.tunable.size()), w.values.size(), "TaskWeights mask");
  if (!w.values.allFinite()) throw NonFiniteError("TaskWeights contain non-finite entries");
}

void TaskSamplerConfig::validate(Eigen::Index d) const {
  if (n_alternatives < 0) throw Error("TaskSamplerConfig: n_alternatives must be non-negative");
  if (stddev.size() != 1 && static_cast<Eigen::Index>(stddev.size()) != d) {
    throw DimensionError("TaskSamplerConfig: stddev must have 1 or d entries");
  }
  if (clamp_range.size() != 1 && static_cast<Eigen::Index>(clamp_range.size()) != d) {
    throw DimensionError("TaskSamplerConfig: clamp_range must have 1 or d entries");
  }
  for (double s : stddev) {
    if (!(s >= 0.0)) throw Error("TaskSamplerConfig: stddev must be non-negative");
  }
  for (auto [lo, hi] : clamp_range) {
    if (!(lo <= hi)) throw Error("TaskSamplerConfig: clamp_range requires low <= high");
  }
}

double TaskSamplerConfig::stddev_at(Eigen::Index i) const {
  return stddev.size() == 1 ? stddev.front() : stddev[static_cast<std::size_t>(i)];
}

std::pair<double, double> TaskSamplerConfig::clamp_at(Eigen::Index i) const {
  return clamp_range.size() == 1 ? clamp_range.front() : clamp_range[static_cast<std::size_t>(i)];
}

double composite_reward(const Eigen::Ref<const Vector>& phi, const Eigen::Ref<const Vector>& w) {
  require_dims(w.size(), phi.size(), "composite_reward");
  return phi.dot(w);
}

double composite_reward(const FeatureVector& phi, const TaskWeights& w) {
  return composite_reward(phi.values, w.values);
}

TaskWeights normalize_weights(const TaskWeights& w) {
  validate(w);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!w.tunable[static_cast<std::size_t>(i)]) continue;
    if (w.values[i] < 0.0) throw Error("normalize_weights: tunable entries must be non-negative");
    sum += w.values[i];
  }
  if (sum <= 0.0) throw Error("normalize_weights: tunable entries are all zero");
  TaskWeights out = w;
  if (std::abs(sum - 1.0) <= 1e-12) return out;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w.tunable[static_cast<std::size_t>(i)]) out.values[i] = w.values[i] / sum;
  }
  return out;
}

TaskWeights perturb_task(const TaskWeights& w, const TaskSamplerConfig& cfg, Rng& rng) {
  validate(w);
  cfg.validate(w.size());
  TaskWeights z = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!w.tunable[static_cast<std::size_t>(i)]) continue;
    const double sd = cfg.stddev_at(i);
    double draw = w.values[i];
    if (sd > 0.0) draw = std::normal_distribution<double>(w.values[i], sd)(rng);
    const auto [lo, hi] = cfg.clamp_at(i);
    z.values[i] = std::clamp(draw, lo, hi);
  }
  return z;
}

std::vector<TaskWeights> sample_task_alternatives(const TaskWeights& w, const TaskSamplerConfig& cfg,
                                                  Rng& rng) {
  cfg.validate(w.size());
  std::vector<TaskWeights> out;
  out.reserve(static_cast<std::size_t>(cfg.n_alternatives));
  for (int k = 0; k < cfg.n_alternatives; ++k) {
    TaskWeights z = perturb_task(w, cfg, rng);
    bool degenerate = true;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (z.tunable[static_cast<std::size_t>(i)] && z.values[i] > 0.0) degenerate = false;
    }
    // A draw clamped to zero on every tunable entry has no normalization; fall back to w.
    out.push_back(degenerate ? w : normalize_weights(z));
  }
  return out;
}

TabularMdp::TabularMdp(int n_states, int n_actions, int feature_dim)
    : n_states_(n_states),
      n_actions_(n_actions),
      feature_dim_(feature_dim),
      probabilities_(static_cast<std::size_t>(n_states * n_actions * n_states), 0.0),
      features_(static_cast<std::size_t>(n_states * n_actions * n_states), Vector::Zero(feature_dim)),
      terminal_(static_cast<std::size_t>(n_states), false) {
  if (n_states <= 0 || n_actions <= 0 || feature_dim <= 0) throw Error("TabularMdp: sizes must be positive");
}

std::size_t TabularMdp::index(State s, Action a, State next) const {
  if (s < 0 || s >= n_states_ || next < 0 || next >= n_states_ || a < 0 || a >= n_actions_) {
    throw DimensionError("TabularMdp: index out of range");
  }
  return static_cast<std::size_t>((s * n_actions_ + a) * n_states_ + next);
}

void TabularMdp::set_transition(State s, Action a, State next, double probability) {
  probabilities_[index(s, a, next)] = probability;
}

void TabularMdp::set_feature(State s, Action a, State next, const Vector& phi) {
  require_dims(phi.size(), feature_dim_, "TabularMdp::set_feature");
  features_[index(s, a, next)] = phi;
}

void TabularMdp::set_terminal(State s, bool terminal) {
  terminal_.at(static_cast<std::size_t>(s)) = terminal;
}

double TabularMdp::transition(State s, Action a, State next) const { return probabilities_[index(s, a, next)]; }

const Vector& TabularMdp::feature(State s, Action a, State next) const { return features_[index(s, a, next)]; }

void TabularMdp::validate() const {
  for (int s = 0; s < n_states_; ++s) {
    for (int a = 0; a < n_actions_; ++a) {
      double total = 0.0;
      for (int n = 0; n < n_states_; ++n) total += transition(s, a, n);
      if (std::abs(total - 1.0) > 1e-12) throw Error("TabularMdp: transition row does not sum to one");
    }
  }
}

TabularMdp::Step TabularMdp::step(State s, Action a, Rng& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  State next = -1;
  for (int n = 0; n < n_states_; ++n) {
    const double p = transition(s, a, n);
    if (p <= 0.0) continue;
    next = n;
    cumulative += p;
    if (u < cumulative) {
      next = n;
      break;
    }
  }
  if (next < 0) throw Error("TabularMdp: no outgoing transition");
  return Step{next, feature(s, a, next), terminal(next)};
}

}  // namespace sflab::sf
