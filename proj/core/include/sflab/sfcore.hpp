#pragma once

// Successor-feature primitives: reward decomposition R = phi^T w, task-weight
// normalization, Gaussian task-alternative sampling and a Monte-Carlo estimator
// of the successor features psi(s, a) used as a test oracle.

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "sflab/types.hpp"

namespace sflab::sf {

/// Per-transition reward components phi(s, a, s').
struct FeatureVector {
  Vector values;

  Eigen::Index size() const { return values.size(); }
};

/// Task specification w. Only entries flagged in `tunable` take part in
/// normalization and alternative sampling; the rest are held fixed.
struct TaskWeights {
  Vector values;
  std::vector<bool> tunable;

  Eigen::Index size() const { return values.size(); }

  /// All entries tunable.
  static TaskWeights all_tunable(Vector values);
  /// Every entry fixed to `value`, all flagged tunable (specialist weights).
  static TaskWeights constant(Eigen::Index d, double value, std::vector<bool> tunable);
};

/// Expected discounted feature sums psi^pi(s, a).
struct SfVector {
  Vector values;
};

struct TaskSamplerConfig {
  int n_alternatives = 2;
  /// One entry per feature dimension, or a single entry broadcast to all.
  std::vector<double> stddev{0.1};
  /// One [low, high] pair per feature dimension, or a single pair broadcast.
  std::vector<std::pair<double, double>> clamp_range{{0.0, 1.0}};

  void validate(Eigen::Index d) const;
  double stddev_at(Eigen::Index i) const;
  std::pair<double, double> clamp_at(Eigen::Index i) const;
};

void validate(const TaskWeights& w);

/// phi^T w.
double composite_reward(const FeatureVector& phi, const TaskWeights& w);
double composite_reward(const Eigen::Ref<const Vector>& phi, const Eigen::Ref<const Vector>& w);

/// Scales the tunable entries so they sum to one. Weights whose tunable subset
/// already sums to one within 1e-12 are returned unchanged, which keeps the
/// operation exactly idempotent.
TaskWeights normalize_weights(const TaskWeights& w);

/// One Gaussian draw around w on the tunable dimensions, clamped to the
/// configured range, before renormalization.
TaskWeights perturb_task(const TaskWeights& w, const TaskSamplerConfig& cfg, Rng& rng);

/// n_alternatives draws of perturb_task followed by normalize_weights.
std::vector<TaskWeights> sample_task_alternatives(const TaskWeights& w, const TaskSamplerConfig& cfg,
                                                  Rng& rng);

/// Finite tabular MDP with vector-valued features, used to exercise the SF
/// machinery against exact dynamic-programming solutions.
class TabularMdp {
 public:
  using State = int;
  using Action = int;

  struct Step {
    State next;
    Vector phi;
    bool done;
  };

  TabularMdp(int n_states, int n_actions, int feature_dim);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int feature_dim() const { return feature_dim_; }

  void set_transition(State s, Action a, State next, double probability);
  void set_feature(State s, Action a, State next, const Vector& phi);
  void set_terminal(State s, bool terminal);

  double transition(State s, Action a, State next) const;
  const Vector& feature(State s, Action a, State next) const;
  bool terminal(State s) const { return terminal_[static_cast<std::size_t>(s)]; }

  /// Throws unless every (s, a) row of the transition kernel sums to one.
  void validate() const;

  Step step(State s, Action a, Rng& rng) const;

 private:
  std::size_t index(State s, Action a, State next) const;

  int n_states_;
  int n_actions_;
  int feature_dim_;
  std::vector<double> probabilities_;
  std::vector<Vector> features_;
  std::vector<bool> terminal_;
};

/// Averaged discounted feature sum over rollouts that start by taking `a` in
/// `s` and then follow `policy`. A model provides `step(state, action, rng)`
/// returning {next, phi, done}; a policy maps (state, rng) to an action.
template <class Model, class Policy>
SfVector monte_carlo_sf(const Model& model, Policy&& policy, const typename Model::State& s,
                        const typename Model::Action& a, double gamma, int n_rollouts, int horizon,
                        Rng& rng) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error("monte_carlo_sf: gamma must lie in [0, 1)");
  if (n_rollouts <= 0 || horizon <= 0) throw Error("monte_carlo_sf: rollouts and horizon must be positive");
  Vector total;
  for (int r = 0; r < n_rollouts; ++r) {
    auto state = s;
    auto action = a;
    double discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      auto step = model.step(state, action, rng);
      if (total.size() == 0) total = Vector::Zero(step.phi.size());
      total += discount * step.phi;
      if (step.done) break;
      discount *= gamma;
      if (discount == 0.0) break;
      state = step.next;
      action = policy(state, rng);
    }
  }
  return SfVector{total / static_cast<double>(n_rollouts)};
}

}  // namespace sflab::sf
