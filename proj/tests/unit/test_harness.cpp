#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sflab/ablation.hpp"
#include "sflab/csv.hpp"
#include "sflab/experiment.hpp"
#include "sflab/inspection.hpp"
#include "sflab/lander.hpp"
#include "sflab/metrics.hpp"
#include "sflab/report.hpp"

using namespace sflab;
using namespace sflab::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sflab_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Small lander run: a few hundred steps with narrow networks.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.env.id = "lander";
  cfg.agent.architecture = agent::Architecture::kStacked;
  cfg.agent.hidden_units = 8;
  cfg.agent.encoder_units = 8;
  cfg.train.total_steps = 200;
  cfg.train.eval_interval = 100;
  cfg.train.eval_episodes = 2;
  cfg.train.warmup_steps = 50;
  cfg.train.batch_size = 16;
  cfg.train.buffer_size = 1000;
  cfg.train.loss_log_interval = 50;
  cfg.train.seeds = {0};
  cfg.env.max_steps = 40;
  return cfg;
}

}  // namespace

// metrics

TEST(Metrics, TrapezoidExamples) {
  const std::vector<double> x{0, 1, 2}, flat{1, 1, 1}, ramp{0, 1, 2};
  EXPECT_DOUBLE_EQ(metrics::trapezoid_auc(x, flat), 2.0);
  EXPECT_DOUBLE_EQ(metrics::trapezoid_auc(x, ramp), 2.0);
  const std::vector<double> uneven{0, 10, 30}, y{1, 3, 0};
  EXPECT_DOUBLE_EQ(metrics::trapezoid_auc(uneven, y), 10 * 2 + 20 * 1.5);
  EXPECT_THROW(metrics::trapezoid_auc(std::vector<double>{0}, std::vector<double>{1}), Error);
  EXPECT_THROW(metrics::trapezoid_auc(std::vector<double>{0, 0}, std::vector<double>{1, 1}), Error);
}

TEST(Metrics, Normalization) {
  const std::map<std::string, double> aucs{{"a", 4.0}, {"b", 2.0}, {"c", 1.0}};
  const auto maxn = metrics::normalize_aucs(aucs, metrics::AucNormalization::kMax);
  EXPECT_DOUBLE_EQ(maxn.at("a"), 1.0);
  EXPECT_DOUBLE_EQ(maxn.at("b"), 0.5);
  EXPECT_DOUBLE_EQ(maxn.at("c"), 0.25);
  const auto mm = metrics::normalize_aucs(aucs, metrics::AucNormalization::kMinMax);
  EXPECT_DOUBLE_EQ(mm.at("a"), 1.0);
  EXPECT_DOUBLE_EQ(mm.at("b"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(mm.at("c"), 0.0);
  const auto same = metrics::normalize_aucs({{"x", 3.0}, {"y", 3.0}}, metrics::AucNormalization::kMinMax);
  EXPECT_EQ(same.at("x"), 1.0);
  EXPECT_EQ(same.at("y"), 1.0);
}

TEST(Metrics, NormalizedAucNeedsSharedGrid) {
  std::map<std::string, metrics::Series> group{{"a", {{0, 1}, {1, 1}}}, {"b", {{0, 2}, {1, 1}}}};
  EXPECT_THROW(metrics::normalized_auc(group, metrics::AucNormalization::kMax), Error);
}

TEST(Metrics, Summary) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const auto s = metrics::summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.stddev, 2.0);
  EXPECT_EQ(s.n, 8u);
  const double sample_sd = std::sqrt(32.0 / 7.0);
  EXPECT_NEAR(s.ci95, 1.96 * sample_sd / std::sqrt(8.0), 1e-12);
  EXPECT_EQ(metrics::summarize(std::vector<double>{3.0}).ci95, 0.0);
}

// csv

TEST(Csv, QuotesAndRoundTrip) {
  std::ostringstream os;
  csv::write_row(os, {"a", csv::field(std::string("SUSFAS Gen[0,1]")), csv::field(0.1), csv::field(-0.0)});
  EXPECT_EQ(os.str(), "a,\"SUSFAS Gen[0,1]\",0.1,0\n");
  const auto t = csv::parse("x,y\n\"p,q\",2.5\n\"say \"\"hi\"\"\",3\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "p,q");
  EXPECT_EQ(t.rows[1][0], "say \"hi\"");
  EXPECT_DOUBLE_EQ(t.number(0, "y"), 2.5);
  EXPECT_THROW(t.column("z"), Error);
  const double tricky = 0.1 + 0.2;
  EXPECT_EQ(std::stod(csv::field(tricky)), tricky);
}

// config

TEST(Config, ParsesSectionsAndComments) {
  const auto cfg = parse_config(
      "# comment\n[env]\nid = inspection\npreset = small\nrta = on-without-penalty\n"
      "[agent]\narch = CUSFAS  # trailing\ntype = specialist\n[train]\nseeds = [1, 3]\nlr = 1e-3\n");
  EXPECT_EQ(cfg.env.id, "inspection");
  EXPECT_EQ(cfg.env.rta, env::RtaMode::kOnWithoutPenalty);
  EXPECT_EQ(cfg.agent.architecture, agent::Architecture::kCollapsed);
  EXPECT_EQ(cfg.agent.type, agent::AgentType::kSpecialist);
  EXPECT_EQ(cfg.train.seeds, (std::vector<int>{1, 3}));
  EXPECT_DOUBLE_EQ(cfg.agent.learning_rate, 1e-3);
}

TEST(Config, ErrorsNameTheKey) {
  try {
    parse_config("[train]\nbatch_size = many\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "train.batch_size");
  }
  EXPECT_THROW(parse_config("[agent]\narch = PPO\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\ngamma = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[nope]\nkey = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("orphan = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[agent]\nweight_range = 0.7, 0.2\n"), ConfigError);
}

TEST(Config, SnapshotRoundTrips) {
  ExperimentConfig cfg = tiny_config();
  cfg.weight_low = 0.2;
  cfg.weight_high = 0.8;
  cfg.z_stddev = 0.125;
  const std::string text = snapshot(cfg);
  EXPECT_EQ(snapshot(parse_config(text)), text);
  for (const auto& key : config_keys()) EXPECT_NE(text.find(key.substr(key.find('.') + 1)), std::string::npos);
}

TEST(Config, LayeringOrder) {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "c.ini");
    f << "[train]\nbatch_size = 32\nbuffer_size = 5000\n[agent]\nhidden_units = 10\n";
  }
  const auto cfg = load_config(dir / "c.ini", {"train.batch_size=64"},
                               {{"train.batch_size", "48"}, {"agent.hidden_units", "12"}});
  EXPECT_EQ(cfg.train.batch_size, 64);
  EXPECT_EQ(cfg.agent.hidden_units, 12);
  EXPECT_EQ(cfg.train.buffer_size, 5000u);
  EXPECT_THROW(load_config(dir / "missing.ini", {}), Error);
  EXPECT_THROW(load_config(std::nullopt, {"train.batch_size=2000000"}), ConfigError);
  fs::remove_all(dir);
}

TEST(Config, EnvironmentVariableNames) {
  std::string a = "SFLAB__TRAIN__GAMMA=0.5", b = "PATH=/bin", c = "SFLAB__AGENT__N_Z=3";
  char* envp[] = {a.data(), b.data(), c.data(), nullptr};
  const auto pairs = env_overrides_from(envp);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_NE(std::find(pairs.begin(), pairs.end(), std::pair<std::string, std::string>{"train.gamma", "0.5"}), pairs.end());
  EXPECT_NE(std::find(pairs.begin(), pairs.end(), std::pair<std::string, std::string>{"agent.n_z", "3"}), pairs.end());
}

TEST(Config, Labels) {
  ExperimentConfig cfg;
  cfg.agent.architecture = agent::Architecture::kStacked;
  cfg.env.rta = env::RtaMode::kOn;
  EXPECT_EQ(cfg.label(), "SUSFAS Gen[0,1]");
  cfg.env.rta = env::RtaMode::kOff;
  cfg.agent.type = agent::AgentType::kSpecialist;
  EXPECT_EQ(cfg.label(), "SUSFA Specialist");
  cfg.agent.architecture = agent::Architecture::kSac;
  cfg.env.rta = env::RtaMode::kOnWithoutPenalty;
  EXPECT_EQ(cfg.label(), "SAC-S w/o R Specialist");
  EXPECT_EQ(cfg.resolved_n_z(), 0);
  cfg.agent.type = agent::AgentType::kGeneralist;
  EXPECT_EQ(cfg.resolved_n_z(), 2);
}

// ablation

TEST(Ablation, PresetSizes) {
  const ExperimentConfig base;
  EXPECT_EQ(ablation_matrix(base, preset_axes("RQ1")).size(), 2u);
  // 2 architectures x (specialist + generalist) x 3 controller modes
  EXPECT_EQ(ablation_matrix(base, preset_axes("RQ2")).size(), 12u);
  const auto rq3 = ablation_matrix(base, preset_axes("RQ3"));
  ASSERT_EQ(rq3.size(), 6u);
  EXPECT_EQ(rq3[0].label(), "SAC-S Gen[0.4,0.6]");
  EXPECT_EQ(rq3[5].label(), "SUSFAS Gen[0,1]");
  EXPECT_THROW(preset_axes("RQ9"), Error);
}

TEST(Ablation, EmptyAxesKeepBase) {
  ExperimentConfig base;
  base.agent.architecture = agent::Architecture::kCollapsed;
  const auto grid = ablation_matrix(base, {});
  ASSERT_EQ(grid.size(), 1u);
  EXPECT_EQ(grid[0].agent.architecture, agent::Architecture::kCollapsed);
  std::set<std::string> labels;
  for (const auto& c : ablation_matrix(base, preset_axes("RQ2"))) labels.insert(c.label());
  EXPECT_EQ(labels.size(), 12u);
}

// experiment

TEST(Experiment, TaskSetupDropsPenaltyUnlessActive) {
  env::InspectionEnv insp;
  EXPECT_EQ(task_setup(insp.spec(), env::RtaMode::kOn).feature_dim(), 5);
  EXPECT_EQ(task_setup(insp.spec(), env::RtaMode::kOff).feature_dim(), 4);
  const auto setup = task_setup(insp.spec(), env::RtaMode::kOnWithoutPenalty);
  EXPECT_EQ(setup.active_features, (std::vector<int>{0, 1, 2, 3}));
  Vector phi(5);
  phi << 1, 2, 3, 4, 5;
  EXPECT_EQ(setup.project(phi), Vector(phi.head<4>()));
  env::LanderEnv lander;
  EXPECT_EQ(task_setup(lander.spec(), env::RtaMode::kOn).feature_dim(), 4);
}

TEST(Experiment, EvaluationAndTrainingWeights) {
  ExperimentConfig cfg = tiny_config();
  env::LanderEnv lander;
  const auto setup = task_setup(lander.spec(), env::RtaMode::kOn);
  const Vector w = evaluation_weights(cfg, setup);
  EXPECT_NEAR(w[0], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(w[1], 1.0);
  cfg.weight_low = 0.4;
  cfg.weight_high = 0.6;
  Rng rng = make_rng(1);
  for (int k = 0; k < 2000; ++k) {
    const Vector t = sample_training_weights(cfg, setup, rng);
    EXPECT_EQ(t[1], 1.0);
    EXPECT_NEAR(t[0] + t[2] + t[3], 1.0, 1e-12);
    for (int i : {0, 2, 3}) {
      // U(0.4, 0.6) normalized over three entries lands in [0.4/1.6, 0.6/1.4].
      EXPECT_GE(t[i], 0.25 - 1e-12);
      EXPECT_LE(t[i], 0.6 / 1.4 + 1e-12);
    }
  }
  cfg.agent.type = agent::AgentType::kSpecialist;
  EXPECT_EQ(evaluation_weights(cfg, setup), Vector::Ones(4));
}

TEST(Experiment, RunLayoutResumeAndConflict) {
  const ExperimentConfig cfg = tiny_config();
  const fs::path dir = scratch("run");
  const RunResult first = run_experiment(cfg, dir);
  ASSERT_TRUE(first.ok());
  EXPECT_FALSE(first.seeds[0].skipped);
  const auto metrics = csv::read(dir / "metrics.csv");
  EXPECT_EQ(metrics.header, metrics_header());
  // evaluations at 0, 100, 200 with two episodes each
  EXPECT_EQ(metrics.rows.size(), 6u);
  std::size_t ckpts = 0;
  for (const auto& e : fs::directory_iterator(dir / "checkpoints" / "seed_0")) ckpts += e.path().extension() == ".ckpt";
  EXPECT_EQ(ckpts, 3u);
  EXPECT_TRUE(fs::exists(dir / "losses.csv"));
  EXPECT_TRUE(fs::exists(dir / "config.snapshot"));

  const std::string before = slurp(dir / "metrics.csv");
  const RunResult again = run_experiment(cfg, dir);
  EXPECT_TRUE(again.seeds[0].skipped);
  EXPECT_EQ(slurp(dir / "metrics.csv"), before);

  ExperimentConfig changed = cfg;
  changed.train.batch_size = 8;
  EXPECT_THROW(run_experiment(changed, dir), RunConflict);
  RunOptions force;
  force.force = true;
  EXPECT_TRUE(run_experiment(changed, dir, force).ok());
  fs::remove_all(dir);
}

TEST(Experiment, EvalAtIntervalEqualToTotal) {
  ExperimentConfig cfg = tiny_config();
  cfg.train.total_steps = 100;
  cfg.train.eval_interval = 100;
  const fs::path dir = scratch("eval_rows");
  run_experiment(cfg, dir);
  const auto metrics = csv::read(dir / "metrics.csv");
  std::set<std::string> steps;
  for (std::size_t r = 0; r < metrics.rows.size(); ++r) steps.insert(metrics.rows[r][metrics.column("step")]);
  EXPECT_EQ(steps, (std::set<std::string>{"0", "100"}));
  fs::remove_all(dir);
}

TEST(Experiment, EvaluationIsPureAndRepeatable) {
  const ExperimentConfig cfg = tiny_config();
  Rng rng = make_rng(3);
  auto agent = build_agent(cfg, rng);
  std::vector<Matrix> before;
  for (const auto* p : agent->state_parameters()) before.push_back(p->value);
  const auto a = evaluate_agent(cfg, *agent, 3);
  const auto b = evaluate_agent(cfg, *agent, 3);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ret, b[i].ret);
    EXPECT_EQ(a[i].delta_v, b[i].delta_v);
    EXPECT_EQ(a[i].length, b[i].length);
  }
  std::vector<Matrix> after;
  for (const auto* p : agent->state_parameters()) after.push_back(p->value);
  EXPECT_EQ(before, after);
}

TEST(Experiment, MetricValueNames) {
  EpisodeMetrics m;
  m.ret = 1.5;
  m.success = true;
  m.length = 7;
  EXPECT_EQ(metric_value(m, "return"), 1.5);
  EXPECT_EQ(metric_value(m, "success"), 1.0);
  EXPECT_EQ(metric_value(m, "length"), 7.0);
  EXPECT_THROW(metric_value(m, "speed"), Error);
}

// report

namespace {

// Writes a run directory with one metric row per (seed, step, episode).
fs::path planted_run(const std::string& name, const std::string& label,
                     const std::map<long, std::vector<double>>& delta_v_by_step, int seeds = 1) {
  const fs::path dir = scratch("report_" + name);
  fs::create_directories(dir);
  ExperimentConfig cfg;
  cfg.name = label;
  {
    std::ofstream f(dir / "config.snapshot");
    f << snapshot(cfg);
  }
  std::ofstream f(dir / "metrics.csv");
  csv::write_row(f, metrics_header());
  for (int seed = 0; seed < seeds; ++seed) {
    for (const auto& [step, values] : delta_v_by_step) {
      for (std::size_t e = 0; e < values.size(); ++e) {
        csv::write_row(f, {std::to_string(seed), std::to_string(step), std::to_string(e), std::to_string(e), "0",
                           csv::field(values[e] + seed), "0", "0", "0", "10", "0"});
      }
    }
  }
  return dir;
}

const AggregateRow* find_row(const Report& r, const std::string& exp, long step, const std::string& metric) {
  for (const auto& row : r.rows) {
    if (row.experiment == exp && row.step == step && row.metric == metric) return &row;
  }
  return nullptr;
}

}  // namespace

TEST(Report, SingleRunCells) {
  const fs::path d = planted_run("single", "A", {{0, {1, 3}}, {10, {2, 2}}});
  std::vector<std::string> warnings;
  const auto runs = load_runs({d}, warnings);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_TRUE(warnings.empty());
  const Report r = build_report(runs);
  const auto* cell = find_row(r, "A", 0, "delta_v");
  ASSERT_NE(cell, nullptr);
  EXPECT_DOUBLE_EQ(cell->summary.mean, 2.0);
  EXPECT_DOUBLE_EQ(cell->summary.stddev, 1.0);
  EXPECT_NEAR(cell->summary.ci95, 1.96 * std::sqrt(2.0) / std::sqrt(2.0), 1e-12);
  // one row per experiment x metric x step
  EXPECT_EQ(r.rows.size(), std::size(kMetricNames) * 2);
  // trapezoid over {0: 2, 10: 2}
  EXPECT_DOUBLE_EQ(r.auc.at("A"), 20.0);
  fs::remove_all(d);
}

TEST(Report, IdenticalRunsNormalizeToOne) {
  const fs::path a = planted_run("ident_a", "A", {{0, {1}}, {10, {2}}});
  const fs::path b = planted_run("ident_b", "B", {{0, {1}}, {10, {2}}});
  std::vector<std::string> warnings;
  const Report r = build_report(load_runs({a, b}, warnings));
  EXPECT_EQ(r.normalized_auc.at("A"), 1.0);
  EXPECT_EQ(r.normalized_auc.at("B"), 1.0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Report, PlantedAucOrdering) {
  const fs::path a = planted_run("plant_a", "A", {{0, {4}}, {10, {4}}});
  const fs::path b = planted_run("plant_b", "B", {{0, {2}}, {10, {2}}});
  const fs::path c = planted_run("plant_c", "C", {{0, {1}}, {10, {1}}});
  std::vector<std::string> warnings;
  const auto runs = load_runs({a, b, c}, warnings);
  ReportOptions opt;
  opt.normalization = metrics::AucNormalization::kMax;
  const Report r = build_report(runs, opt);
  EXPECT_DOUBLE_EQ(r.normalized_auc.at("A"), 1.0);
  EXPECT_DOUBLE_EQ(r.normalized_auc.at("B"), 0.5);
  EXPECT_DOUBLE_EQ(r.normalized_auc.at("C"), 0.25);
  std::ostringstream os;
  write_auc_csv(r, os);
  EXPECT_NE(os.str().find("A"), std::string::npos);
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST(Report, PerSeedAggregation) {
  const fs::path d = planted_run("per_seed", "A", {{0, {1, 3}}}, 2);
  std::vector<std::string> warnings;
  const auto runs = load_runs({d}, warnings);
  const std::vector<const RunData*> ptrs{&runs[0]};
  const auto pooled = cell_values(ptrs, 0, "delta_v", false);
  EXPECT_EQ(pooled.size(), 4u);
  const auto seeds = cell_values(ptrs, 0, "delta_v", true);
  EXPECT_EQ(seeds, (std::vector<double>{2.0, 3.0}));
  fs::remove_all(d);
}

TEST(Report, MissingMetricsWarns) {
  const fs::path empty = scratch("report_empty");
  fs::create_directories(empty);
  std::vector<std::string> warnings;
  EXPECT_TRUE(load_runs({empty}, warnings).empty());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("metrics.csv"), std::string::npos);
  fs::remove_all(empty);
}

TEST(Report, PlotBandCollapsesForIdenticalValues) {
  const fs::path d = planted_run("plot", "A", {{0, {2, 2, 2}}, {10, {1, 2, 3}}});
  std::vector<std::string> warnings;
  const auto rows = plot_data(load_runs({d}, warnings), "delta_v");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].ci_low, 2.0);
  EXPECT_EQ(rows[0].ci_high, 2.0);
  EXPECT_LT(rows[1].ci_low, rows[1].mean);
  EXPECT_GT(rows[1].ci_high, rows[1].mean);
  EXPECT_NE(render_svg(rows, "delta_v").find("<svg"), std::string::npos);
  EXPECT_THROW(plot_data(load_runs({d}, warnings), "speed"), Error);
  fs::remove_all(d);
}
