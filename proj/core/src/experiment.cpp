#include "sflab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sflab/checkpoint.hpp"
#include "sflab/csv.hpp"
#include "sflab/replay.hpp"

namespace sflab::harness {

namespace fs = std::filesystem;

namespace {

// Stream ids for make_rng(root_seed, seed, stream).
enum Stream : std::uint64_t { kInit = 1, kEnv = 2, kAction = 3, kReplay = 4, kTask = 5 };

std::vector<std::string> loss_header(int d, bool per_feature) {
  std::vector<std::string> h{"seed", "step", "updates", "actor", "critic1", "critic2", "temperature", "tau"};
  if (per_feature) {
    for (int m = 1; m <= 2; ++m) {
      for (int i = 0; i < d; ++i) h.push_back("critic" + std::to_string(m) + "_psi" + std::to_string(i));
    }
  }
  return h;
}

struct LossWindow {
  long count = 0;
  agent::LossReport sum;

  void add(const agent::LossReport& r) {
    if (count == 0) {
      sum = r;
    } else {
      sum.actor += r.actor;
      sum.critic1 += r.critic1;
      sum.critic2 += r.critic2;
      sum.temperature += r.temperature;
      sum.tau += r.tau;
      for (std::size_t i = 0; i < r.critic1_components.size(); ++i) sum.critic1_components[i] += r.critic1_components[i];
      for (std::size_t i = 0; i < r.critic2_components.size(); ++i) sum.critic2_components[i] += r.critic2_components[i];
    }
    ++count;
  }
};

std::vector<std::string> metrics_row(int seed, long step, int episode, const EpisodeMetrics& m) {
  return {std::to_string(seed),        std::to_string(step),          std::to_string(episode),
          std::to_string(episode),     csv::field(m.ret),             csv::field(m.delta_v),
          csv::field(m.fuel_reward),   csv::field(m.inspection_reward), std::to_string(m.rta_activations),
          std::to_string(m.length),    m.success ? "1" : "0"};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

void append_file(std::ostream& out, const fs::path& p, bool skip_header) {
  std::ifstream in(p);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    out << line << '\n';
  }
}

Vector uniform_action(int dim, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector a(dim);
  for (int i = 0; i < dim; ++i) a[i] = u(rng);
  return a;
}

}  // namespace

Vector TaskSetup::project(const Vector& phi) const {
  Vector out(feature_dim());
  for (int i = 0; i < feature_dim(); ++i) out[i] = phi[active_features[static_cast<std::size_t>(i)]];
  return out;
}

TaskSetup task_setup(const env::EnvSpec& spec, env::RtaMode rta) {
  TaskSetup setup;
  for (int i = 0; i < spec.feature_dim(); ++i) {
    if (i == spec.penalty_feature && rta != env::RtaMode::kOn) continue;
    setup.active_features.push_back(i);
    setup.tunable.push_back(spec.tunable[static_cast<std::size_t>(i)]);
  }
  return setup;
}

Vector evaluation_weights(const ExperimentConfig& cfg, const TaskSetup& setup) {
  Vector w = Vector::Ones(setup.feature_dim());
  if (cfg.agent.type == agent::AgentType::kSpecialist) return w;
  const auto k = std::count(setup.tunable.begin(), setup.tunable.end(), true);
  for (int i = 0; i < w.size(); ++i) {
    if (setup.tunable[static_cast<std::size_t>(i)]) w[i] = 1.0 / static_cast<double>(k);
  }
  return w;
}

Vector sample_training_weights(const ExperimentConfig& cfg, const TaskSetup& setup, Rng& rng) {
  if (cfg.agent.type == agent::AgentType::kSpecialist) return Vector::Ones(setup.feature_dim());
  std::uniform_real_distribution<double> u(cfg.weight_low, cfg.weight_high);
  sf::TaskWeights w{Vector::Ones(setup.feature_dim()), setup.tunable};
  for (;;) {
    double total = 0.0;
    for (int i = 0; i < w.values.size(); ++i) {
      if (setup.tunable[static_cast<std::size_t>(i)]) {
        w.values[i] = u(rng);
        total += w.values[i];
      }
    }
    if (total > 0.0) break;
  }
  return sf::normalize_weights(w).values;
}

sf::TaskSamplerConfig sampler_config(const ExperimentConfig& cfg, const TaskSetup& setup) {
  sf::TaskSamplerConfig s;
  s.n_alternatives = cfg.resolved_n_z();
  s.stddev = {cfg.z_stddev};
  const double k = static_cast<double>(std::count(setup.tunable.begin(), setup.tunable.end(), true));
  double lo = 0.0, hi = 1.0;
  if (cfg.agent.type == agent::AgentType::kGeneralist) {
    const double a = cfg.weight_low, b = cfg.weight_high;
    lo = a > 0.0 ? a / (a + (k - 1.0) * b) : 0.0;
    hi = b / (b + (k - 1.0) * a);
  } else {
    hi = 2.0;
  }
  s.clamp_range = {{lo, hi}};
  return s;
}

double metric_value(const EpisodeMetrics& m, const std::string& name) {
  if (name == "return") return m.ret;
  if (name == "delta_v") return m.delta_v;
  if (name == "fuel_reward") return m.fuel_reward;
  if (name == "inspection_reward") return m.inspection_reward;
  if (name == "rta_activations") return m.rta_activations;
  if (name == "length") return m.length;
  if (name == "success") return m.success ? 1.0 : 0.0;
  throw Error("unknown metric '" + name + "'");
}

std::vector<std::string> metrics_header() {
  return {"seed",        "step",          "episode",          "eval_seed",      "return", "delta_v",
          "fuel_reward", "inspection_reward", "rta_activations", "length", "success"};
}

EpisodeMetrics run_episode(env::Environment& env, const TaskSetup& setup, const Vector& w, const ActionFn& act,
                           Rng& env_rng, std::vector<std::vector<double>>* trace) {
  EpisodeMetrics m;
  Vector obs = env.reset(env_rng);
  for (;;) {
    const Vector action = act ? act(obs) : uniform_action(env.spec().action_dim, env_rng);
    const env::StepResult r = env.step(action);
    m.ret += setup.project(r.phi).dot(w);
    m.delta_v += r.delta_v;
    m.fuel_reward += r.fuel_reward;
    m.inspection_reward += r.task_reward;
    m.rta_activations += r.intervened ? 1 : 0;
    ++m.length;
    if (trace) trace->push_back(env.trace_row(r));
    if (r.done()) {
      m.success = r.success;
      break;
    }
    obs = r.obs;
  }
  return m;
}

agent::AgentDims agent_dims(const ExperimentConfig& cfg) {
  const auto env = env::make_environment(cfg.env);
  const TaskSetup setup = task_setup(env->spec(), cfg.env.rta);
  return {env->spec().obs_dim, env->spec().action_dim, setup.feature_dim()};
}

agent::AgentConfig resolved_agent_config(const ExperimentConfig& cfg) {
  agent::AgentConfig a = cfg.agent;
  a.n_alternatives = a.architecture == agent::Architecture::kSac ? 0 : cfg.resolved_n_z();
  return a;
}

std::unique_ptr<agent::Agent> build_agent(const ExperimentConfig& cfg, Rng& rng) {
  return agent::make_agent(resolved_agent_config(cfg), agent_dims(cfg), rng);
}

std::vector<EpisodeMetrics> evaluate_agent(const ExperimentConfig& cfg, agent::Agent& agent, int episodes,
                                           std::vector<std::vector<double>>* first_trace) {
  auto env = env::make_environment(cfg.env);
  const TaskSetup setup = task_setup(env->spec(), cfg.env.rta);
  const Vector w = evaluation_weights(cfg, setup);
  Rng unused = make_rng(0);  // deterministic actions draw nothing
  const ActionFn act = [&](const Vector& obs) { return agent.act(obs, w, {}, true, unused); };
  std::vector<EpisodeMetrics> out;
  for (int e = 0; e < episodes; ++e) {
    Rng env_rng = make_rng(cfg.train.root_seed, kEvalStream, static_cast<std::uint64_t>(e));
    out.push_back(run_episode(*env, setup, w, act, env_rng, e == 0 ? first_trace : nullptr));
  }
  return out;
}

std::vector<EpisodeMetrics> evaluate_random_policy(const ExperimentConfig& cfg, int episodes, std::uint64_t seed) {
  auto env = env::make_environment(cfg.env);
  const TaskSetup setup = task_setup(env->spec(), cfg.env.rta);
  const Vector w = evaluation_weights(cfg, setup);
  Rng action_rng = make_rng(seed, kAction);
  const int dim = env->spec().action_dim;
  const ActionFn act = [&](const Vector&) { return uniform_action(dim, action_rng); };
  std::vector<EpisodeMetrics> out;
  for (int e = 0; e < episodes; ++e) {
    Rng env_rng = make_rng(cfg.train.root_seed, kEvalStream, static_cast<std::uint64_t>(e));
    out.push_back(run_episode(*env, setup, w, act, env_rng));
  }
  return out;
}

bool RunResult::ok() const {
  return std::none_of(seeds.begin(), seeds.end(), [](const SeedResult& s) { return s.failed; });
}

namespace {

class SeedRunner {
 public:
  SeedRunner(const ExperimentConfig& cfg, const fs::path& run_dir, int seed, std::ostream* log, std::mutex& log_mutex)
      : cfg_(cfg), run_dir_(run_dir), seed_(seed), log_(log), log_mutex_(log_mutex) {}

  SeedResult run() {
    SeedResult result;
    result.seed = seed_;
    const fs::path dir = run_dir_ / "seeds" / ("seed_" + std::to_string(seed_));
    if (fs::exists(dir / "complete")) {
      result.skipped = true;
      result.steps = cfg_.train.total_steps;
      return result;
    }
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream metrics(dir / "metrics.csv");
    std::ofstream losses(dir / "losses.csv");
    try {
      train(metrics, losses, result);
    } catch (const std::exception& e) {
      result.failed = true;
      result.failure = e.what();
      write_file(dir / "failure.txt", std::to_string(result.steps) + "\n" + e.what() + "\n");
      say("seed " + std::to_string(seed_) + " aborted at step " + std::to_string(result.steps) + ": " + e.what());
    }
    metrics.close();
    losses.close();
    write_file(dir / "complete", "");
    return result;
  }

 private:
  void say(const std::string& msg) {
    if (!log_) return;
    std::lock_guard lock(log_mutex_);
    *log_ << msg << std::endl;
  }

  void evaluate(agent::Agent& agent, long step, std::ostream& metrics) {
    std::vector<std::vector<double>> trace;
    const auto episodes = evaluate_agent(cfg_, agent, cfg_.train.eval_episodes, cfg_.train.traces ? &trace : nullptr);
    double mean_return = 0.0;
    for (std::size_t e = 0; e < episodes.size(); ++e) {
      csv::write_row(metrics, metrics_row(seed_, step, static_cast<int>(e), episodes[e]));
      mean_return += episodes[e].ret / static_cast<double>(episodes.size());
    }
    metrics.flush();
    const std::string tag = "step_" + std::to_string(step);
    if (cfg_.train.checkpoints) {
      const fs::path ckpt_dir = run_dir_ / "checkpoints" / ("seed_" + std::to_string(seed_));
      fs::create_directories(ckpt_dir);
      nn::write_checkpoint(ckpt_dir / (tag + ".ckpt"),
                           agent.checkpoint({{"seed", std::to_string(seed_)}, {"step", std::to_string(step)}}));
    }
    if (cfg_.train.traces) {
      fs::create_directories(run_dir_ / "traces");
      std::ofstream out(run_dir_ / "traces" / ("seed_" + std::to_string(seed_) + "_" + tag + ".csv"));
      auto env = env::make_environment(cfg_.env);
      csv::write_row(out, env->trace_columns());
      for (const auto& row : trace) {
        std::vector<std::string> fields;
        for (double v : row) fields.push_back(csv::field(v));
        csv::write_row(out, fields);
      }
    }
    std::ostringstream msg;
    msg << cfg_.label() << " seed " << seed_ << " step " << step << " eval return " << mean_return;
    say(msg.str());
  }

  void train(std::ostream& metrics, std::ostream& losses, SeedResult& result) {
    const auto& tc = cfg_.train;
    const std::uint64_t root = tc.root_seed;
    const auto s = static_cast<std::uint64_t>(seed_);
    Rng init_rng = make_rng(root, s, kInit);
    Rng env_rng = make_rng(root, s, kEnv);
    Rng action_rng = make_rng(root, s, kAction);
    Rng replay_rng = make_rng(root, s, kReplay);
    Rng task_rng = make_rng(root, s, kTask);

    auto env = env::make_environment(cfg_.env);
    const TaskSetup setup = task_setup(env->spec(), cfg_.env.rta);
    auto agent = build_agent(cfg_, init_rng);
    const agent::AgentDims dims = agent->dims();
    const sf::TaskSamplerConfig sampler = sampler_config(cfg_, setup);
    const int n_z = agent->config().n_alternatives;
    agent::ReplayBuffer buffer({dims.obs_dim, dims.action_dim, dims.feature_dim, n_z}, tc.buffer_size);

    csv::write_row(metrics, metrics_header());
    const bool per_feature = cfg_.agent.architecture != agent::Architecture::kSac;
    csv::write_row(losses, loss_header(dims.feature_dim, per_feature));

    evaluate(*agent, 0, metrics);
    Vector w = sample_training_weights(cfg_, setup, task_rng);
    Vector obs = env->reset(env_rng);
    LossWindow window;
    for (long t = 1; t <= tc.total_steps; ++t) {
      result.steps = t;
      std::vector<Vector> alternatives;
      if (n_z > 0) {
        for (auto& z : sf::sample_task_alternatives(sf::TaskWeights{w, setup.tunable}, sampler, task_rng)) {
          alternatives.push_back(std::move(z.values));
        }
      }
      const Vector action = t <= tc.warmup_steps ? uniform_action(dims.action_dim, action_rng)
                                                 : agent->act(obs, w, alternatives, false, action_rng);
      const env::StepResult r = env->step(action);
      buffer.push({obs, action, setup.project(r.phi), r.obs, r.terminal, w, alternatives});
      obs = r.obs;
      if (r.done()) {
        obs = env->reset(env_rng);
        w = sample_training_weights(cfg_, setup, task_rng);
      }
      if (t > tc.warmup_steps && buffer.size() >= static_cast<std::size_t>(tc.batch_size)) {
        for (int g = 0; g < cfg_.agent.gradient_steps; ++g) {
          const agent::Batch batch = buffer.sample(tc.batch_size, replay_rng);
          window.add(agent->update(batch, replay_rng));
        }
      }
      if (t % tc.loss_log_interval == 0 && window.count > 0) {
        write_losses(losses, t, window, per_feature);
        window = LossWindow{};
      }
      if (t % tc.eval_interval == 0) evaluate(*agent, t, metrics);
    }
  }

  void write_losses(std::ostream& out, long step, const LossWindow& w, bool per_feature) {
    const double n = static_cast<double>(w.count);
    std::vector<std::string> row{std::to_string(seed_),           std::to_string(step),
                                 std::to_string(w.count),         csv::field(w.sum.actor / n),
                                 csv::field(w.sum.critic1 / n),   csv::field(w.sum.critic2 / n),
                                 csv::field(w.sum.temperature / n), csv::field(w.sum.tau / n)};
    if (per_feature) {
      for (double v : w.sum.critic1_components) row.push_back(csv::field(v / n));
      for (double v : w.sum.critic2_components) row.push_back(csv::field(v / n));
    }
    csv::write_row(out, row);
    out.flush();
  }

  const ExperimentConfig& cfg_;
  fs::path run_dir_;
  int seed_;
  std::ostream* log_;
  std::mutex& log_mutex_;
};

void merge_outputs(const ExperimentConfig& cfg, const fs::path& run_dir) {
  std::ofstream metrics(run_dir / "metrics.csv");
  std::ofstream losses(run_dir / "losses.csv");
  std::ofstream failures(run_dir / "failures.csv");
  csv::write_row(failures, {"seed", "step", "message"});
  bool metrics_header_done = false, losses_header_done = false;
  for (int seed : cfg.train.seeds) {
    const fs::path dir = run_dir / "seeds" / ("seed_" + std::to_string(seed));
    if (fs::exists(dir / "metrics.csv")) {
      append_file(metrics, dir / "metrics.csv", metrics_header_done);
      metrics_header_done = true;
    }
    if (fs::exists(dir / "losses.csv")) {
      append_file(losses, dir / "losses.csv", losses_header_done);
      losses_header_done = true;
    }
    if (fs::exists(dir / "failure.txt")) {
      std::istringstream in(read_file(dir / "failure.txt"));
      std::string step, message;
      std::getline(in, step);
      std::getline(in, message);
      csv::write_row(failures, {std::to_string(seed), step, csv::field(message)});
    }
  }
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& run_dir, const RunOptions& options) {
  validate(cfg);
  const std::string snap = snapshot(cfg);
  const fs::path snap_path = run_dir / "config.snapshot";
  if (options.force) fs::remove_all(run_dir);
  if (fs::exists(snap_path) && read_file(snap_path) != snap) {
    throw RunConflict("run directory " + run_dir.string() +
                      " holds a different configuration; pass --force to overwrite it");
  }
  fs::create_directories(run_dir);
  write_file(snap_path, snap);

  RunResult result;
  result.dir = run_dir;
  result.seeds.resize(cfg.train.seeds.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.train.seeds.size(); i = next++) {
      SeedRunner runner(cfg, run_dir, cfg.train.seeds[i], options.log, log_mutex);
      result.seeds[i] = runner.run();
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.train.jobs, static_cast<int>(cfg.train.seeds.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  merge_outputs(cfg, run_dir);
  return result;
}

}  // namespace sflab::harness
