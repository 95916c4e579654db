#pragma once
// Seeded train/eval loops and run-directory management.
//
// Run directory layout:
//   config.snapshot                    resolved configuration
//   metrics.csv                        one row per evaluation episode
//   losses.csv                         windowed loss averages
//   failures.csv                       seeds aborted by a non-finite loss
//   checkpoints/seed_<k>/step_<N>.ckpt agent parameters at each evaluation
//   traces/seed_<k>_step_<N>.csv       first evaluation episode (optional)
//   seeds/seed_<k>/                    per-seed working files and completion marker

#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <vector>

#include "sflab/agent.hpp"
#include "sflab/config.hpp"
#include "sflab/environment.hpp"
#include "sflab/sfcore.hpp"

namespace sflab::harness {

/// Stream id for the fixed evaluation episodes, shared by every seed.
inline constexpr std::uint64_t kEvalStream = 0x6576616cULL;

/// Features the agent learns from: the controller-penalty feature is dropped
/// unless the penalty is active.
struct TaskSetup {
  std::vector<int> active_features;
  std::vector<bool> tunable;

  int feature_dim() const { return static_cast<int>(active_features.size()); }
  Vector project(const Vector& phi) const;
};

TaskSetup task_setup(const env::EnvSpec& spec, env::RtaMode rta);

/// Specialists: all ones. Generalists: equal tunable weights summing to one,
/// fixed entries at 1.
Vector evaluation_weights(const ExperimentConfig& cfg, const TaskSetup& setup);
/// Specialists: all ones. Generalists: tunable entries ~ U(low, high), then normalized.
Vector sample_training_weights(const ExperimentConfig& cfg, const TaskSetup& setup, Rng& rng);
/// Alternative-task sampler; the clamp range is the normalized image of the weight box.
sf::TaskSamplerConfig sampler_config(const ExperimentConfig& cfg, const TaskSetup& setup);

struct EpisodeMetrics {
  double ret = 0.0;
  double delta_v = 0.0;
  double fuel_reward = 0.0;
  double inspection_reward = 0.0;
  int rta_activations = 0;
  int length = 0;
  bool success = false;
};

inline constexpr const char* kMetricNames[] = {"return",          "delta_v",    "fuel_reward", "inspection_reward",
                                                "rta_activations", "length",     "success"};
double metric_value(const EpisodeMetrics& m, const std::string& name);

/// Chooses an action for the current observation; null means uniform random.
using ActionFn = std::function<Vector(const Vector& obs)>;

/// Runs one episode to termination or truncation. `trace` receives the
/// environment's trace rows when non-null.
EpisodeMetrics run_episode(env::Environment& env, const TaskSetup& setup, const Vector& w, const ActionFn& act,
                           Rng& env_rng, std::vector<std::vector<double>>* trace = nullptr);

agent::AgentDims agent_dims(const ExperimentConfig& cfg);
agent::AgentConfig resolved_agent_config(const ExperimentConfig& cfg);
std::unique_ptr<agent::Agent> build_agent(const ExperimentConfig& cfg, Rng& rng);

/// Deterministic evaluation on the fixed evaluation seeds 0..episodes-1.
std::vector<EpisodeMetrics> evaluate_agent(const ExperimentConfig& cfg, agent::Agent& agent, int episodes,
                                           std::vector<std::vector<double>>* first_trace = nullptr);
/// Same evaluation protocol with uniformly random actions drawn from `seed`.
std::vector<EpisodeMetrics> evaluate_random_policy(const ExperimentConfig& cfg, int episodes, std::uint64_t seed);

struct SeedResult {
  int seed = 0;
  bool skipped = false;  // already complete in the run directory
  bool failed = false;
  std::string failure;
  long steps = 0;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<SeedResult> seeds;

  bool ok() const;
};

struct RunOptions {
  bool force = false;         // wipe an existing run directory first
  std::ostream* log = nullptr;
};

class RunConflict : public Error {
 public:
  using Error::Error;
};

/// Trains and evaluates every configured seed, resuming at seed granularity.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& run_dir,
                         const RunOptions& options = {});

/// Metrics header shared by run directories and reports.
std::vector<std::string> metrics_header();

}  // namespace sflab::harness
