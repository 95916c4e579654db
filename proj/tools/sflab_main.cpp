// sflab: train, evaluate and report on successor-feature safe-RL experiments.
//
// Exit codes: 0 success, 1 usage error, 2 config error, 3 run failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sflab/ablation.hpp"
#include "sflab/checkpoint.hpp"
#include "sflab/config.hpp"
#include "sflab/csv.hpp"
#include "sflab/experiment.hpp"
#include "sflab/inspection.hpp"
#include "sflab/report.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace sflab;
using namespace sflab::harness;

namespace {

constexpr int kUsageError = 1;
constexpr int kConfigError = 2;
constexpr int kRunFailure = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

class RunFailure : public Error {
 public:
  using Error::Error;
};

struct ConfigArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App& app) {
    app.add_option("-c,--config", config, "Config file (key = value under [section] headers)");
    app.add_option("-s,--set", overrides, "Override as section.key=value (repeatable)");
    app.add_option("--seed", seed, "Root seed every random stream derives from");
  }

  ExperimentConfig load() const {
    std::optional<fs::path> path;
    if (!config.empty()) {
      if (!fs::exists(config)) throw UsageError("config file not found: " + config);
      path = config;
    }
    std::vector<std::string> all = overrides;
    if (seed) all.push_back("train.root_seed=" + std::to_string(*seed));
    return load_config(path, all, env_overrides_from(environ));
  }
};

void write_episodes(std::ostream& os, const std::vector<EpisodeMetrics>& episodes) {
  std::vector<std::string> header{"episode"};
  for (const char* m : kMetricNames) header.emplace_back(m);
  csv::write_row(os, header);
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    std::vector<std::string> row{std::to_string(e)};
    for (const char* m : kMetricNames) row.push_back(csv::field(metric_value(episodes[e], m)));
    csv::write_row(os, row);
  }
}

void check_result(const RunResult& result) {
  std::string failed;
  for (const auto& s : result.seeds) {
    if (s.failed) failed += " seed " + std::to_string(s.seed) + " (" + s.failure + ")";
  }
  if (!failed.empty()) throw RunFailure(result.dir.string() + ": failed" + failed);
}

/// Directory-safe form of an experiment label.
std::string slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') {
      out += c;
    } else if (c == ' ' || c == ',' || c == '_') {
      if (!out.empty() && out.back() != '_') out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

void open_output(std::ofstream& os, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  os.open(path);
  if (!os) throw RunFailure("cannot write " + path.string());
}

ExperimentConfig config_for_checkpoint(const ConfigArgs& args, const std::string& run_dir) {
  if (run_dir.empty()) return args.load();
  const fs::path snap = fs::path(run_dir) / "config.snapshot";
  if (!fs::exists(snap)) throw UsageError("no config.snapshot in " + run_dir);
  ConfigArgs with_snapshot = args;
  if (with_snapshot.config.empty()) with_snapshot.config = snap.string();
  return with_snapshot.load();
}

std::unique_ptr<agent::Agent> restore_agent(const ExperimentConfig& cfg, const std::string& checkpoint) {
  if (!fs::exists(checkpoint)) throw UsageError("checkpoint not found: " + checkpoint);
  Rng rng = make_rng(cfg.train.root_seed);
  auto agent = build_agent(cfg, rng);
  agent->restore(nn::read_checkpoint(checkpoint));
  return agent;
}

int run(int argc, char** argv) {
  CLI::App app{"Successor-feature safe reinforcement learning laboratory"};
  app.require_subcommand(1);

  // train
  ConfigArgs train_args;
  std::string train_out;
  bool train_force = false;
  auto* train = app.add_subcommand("train", "Train and evaluate every configured seed");
  train_args.add_to(*train);
  train->add_option("-o,--out", train_out, "Run directory")->required();
  train->add_flag("--force", train_force, "Discard an existing run directory");

  // eval
  ConfigArgs eval_args;
  std::string eval_run, eval_ckpt, eval_out;
  int eval_episodes = -1;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the fixed evaluation seeds");
  eval_args.add_to(*eval);
  eval->add_option("--run", eval_run, "Run directory whose config.snapshot describes the agent");
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("--episodes", eval_episodes, "Episodes (default: train.eval_episodes)");
  eval->add_option("-o,--out", eval_out, "Per-episode CSV (default: stdout)");

  // ablate
  ConfigArgs ablate_args;
  std::string ablate_preset, ablate_out;
  bool ablate_force = false, ablate_list = false;
  auto* ablate = app.add_subcommand("ablate", "Run an ablation preset, one run directory per configuration");
  ablate_args.add_to(*ablate);
  ablate->add_option("--preset", ablate_preset, "RQ1, RQ2 or RQ3")->required();
  ablate->add_option("-o,--out", ablate_out, "Parent directory for the runs")->required();
  ablate->add_flag("--force", ablate_force, "Discard existing run directories");
  ablate->add_flag("--list", ablate_list, "Print the expanded configurations without running");

  // report
  std::vector<std::string> report_runs;
  std::string report_out, report_metric = "delta_v";
  bool report_max = false, report_per_seed = false;
  auto* report = app.add_subcommand("report", "Summary tables and normalized AUC over completed runs");
  report->add_option("runs", report_runs, "Run directories")->required();
  report->add_option("-o,--out", report_out, "Directory for summary.csv and auc.csv");
  report->add_option("--auc-metric", report_metric, "Metric integrated for the AUC table");
  report->add_flag("--max-normalization", report_max, "Divide AUCs by the group maximum instead of min-max");
  report->add_flag("--per-seed", report_per_seed, "Aggregate per-seed means instead of every episode");

  // plot
  std::vector<std::string> plot_runs;
  std::string plot_out, plot_metric = "delta_v";
  bool plot_per_seed = false;
  auto* plot = app.add_subcommand("plot", "Training curve with 95% interval band (CSV + SVG)");
  plot->add_option("runs", plot_runs, "Run directories")->required();
  plot->add_option("-m,--metric", plot_metric, "Metric to plot");
  plot->add_option("-o,--out", plot_out, "Output directory")->required();
  plot->add_flag("--per-seed", plot_per_seed, "Interval over per-seed means");

  // trace
  ConfigArgs trace_args;
  std::string trace_run, trace_ckpt, trace_out, trace_cloud;
  int trace_episode = 0;
  auto* trace = app.add_subcommand("trace", "Export one evaluation episode as CSV");
  trace_args.add_to(*trace);
  trace->add_option("--run", trace_run, "Run directory providing the config");
  trace->add_option("--checkpoint", trace_ckpt, "Agent checkpoint (default: uniform random actions)");
  trace->add_option("--episode", trace_episode, "Evaluation episode index")->check(CLI::NonNegativeNumber);
  trace->add_option("-o,--out", trace_out, "Trace CSV")->required();
  trace->add_option("--cloud", trace_cloud, "Inspection only: point cloud with final inspected flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  if (*train) {
    const ExperimentConfig cfg = train_args.load();
    check_result(run_experiment(cfg, train_out, {train_force, &std::cerr}));
  } else if (*eval) {
    const ExperimentConfig cfg = config_for_checkpoint(eval_args, eval_run);
    auto agent = restore_agent(cfg, eval_ckpt);
    const auto episodes = evaluate_agent(cfg, *agent, eval_episodes > 0 ? eval_episodes : cfg.train.eval_episodes);
    if (eval_out.empty()) {
      write_episodes(std::cout, episodes);
    } else {
      std::ofstream os;
      open_output(os, eval_out);
      write_episodes(os, episodes);
    }
  } else if (*ablate) {
    const ExperimentConfig base = ablate_args.load();
    const auto configs = ablation_matrix(base, preset_axes(ablate_preset));
    for (const auto& cfg : configs) {
      const fs::path dir = fs::path(ablate_out) / slug(cfg.label());
      if (ablate_list) {
        std::cout << cfg.label() << "\t" << dir.string() << "\n";
        continue;
      }
      std::cerr << "== " << cfg.label() << " -> " << dir.string() << "\n";
      check_result(run_experiment(cfg, dir, {ablate_force, &std::cerr}));
    }
  } else if (*report) {
    std::vector<std::string> warnings;
    std::vector<fs::path> dirs(report_runs.begin(), report_runs.end());
    const auto runs = load_runs(dirs, warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (runs.empty()) throw RunFailure("no run directory holds metrics.csv");
    ReportOptions opts;
    opts.normalization = report_max ? metrics::AucNormalization::kMax : metrics::AucNormalization::kMinMax;
    opts.auc_metric = report_metric;
    opts.per_seed = report_per_seed;
    const Report rep = build_report(runs, opts);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << format_report_text(rep);
    if (!report_out.empty()) {
      std::ofstream summary, auc;
      open_output(summary, fs::path(report_out) / "summary.csv");
      open_output(auc, fs::path(report_out) / "auc.csv");
      write_summary_csv(rep, summary);
      write_auc_csv(rep, auc);
    }
  } else if (*plot) {
    std::vector<std::string> warnings;
    std::vector<fs::path> dirs(plot_runs.begin(), plot_runs.end());
    const auto runs = load_runs(dirs, warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (runs.empty()) throw RunFailure("no run directory holds metrics.csv");
    std::vector<PlotRow> rows;
    try {
      rows = plot_data(runs, plot_metric, plot_per_seed);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    std::ofstream data, svg;
    open_output(data, fs::path(plot_out) / (plot_metric + ".csv"));
    open_output(svg, fs::path(plot_out) / (plot_metric + ".svg"));
    write_plot_csv(rows, data);
    svg << render_svg(rows, plot_metric);
  } else if (*trace) {
    const ExperimentConfig cfg = config_for_checkpoint(trace_args, trace_run);
    auto env = env::make_environment(cfg.env);
    const TaskSetup setup = task_setup(env->spec(), cfg.env.rta);
    const Vector w = evaluation_weights(cfg, setup);
    std::unique_ptr<agent::Agent> agent;
    if (!trace_ckpt.empty()) agent = restore_agent(cfg, trace_ckpt);
    Rng unused = make_rng(0);
    ActionFn act;
    if (agent) act = [&](const Vector& obs) { return agent->act(obs, w, {}, true, unused); };
    Rng env_rng = make_rng(cfg.train.root_seed, kEvalStream, static_cast<std::uint64_t>(trace_episode));
    std::vector<std::vector<double>> rows;
    const EpisodeMetrics m = run_episode(*env, setup, w, act, env_rng, &rows);
    std::ofstream os;
    open_output(os, trace_out);
    csv::write_row(os, env->trace_columns());
    for (const auto& r : rows) {
      std::vector<std::string> fields;
      for (double v : r) fields.push_back(csv::field(v));
      csv::write_row(os, fields);
    }
    if (!trace_cloud.empty()) {
      const auto* insp = dynamic_cast<const env::InspectionEnv*>(env.get());
      if (!insp) throw UsageError("--cloud applies to the inspection environment only");
      std::ofstream cloud;
      open_output(cloud, trace_cloud);
      csv::write_row(cloud, {"index", "x", "y", "z", "inspected"});
      const auto& points = insp->cloud();
      for (std::size_t i = 0; i < points.size(); ++i) {
        csv::write_row(cloud, {std::to_string(i), csv::field(points[i].x()), csv::field(points[i].y()),
                               csv::field(points[i].z()), insp->state().inspected[i] ? "1" : "0"});
      }
    }
    std::cerr << "episode return " << m.ret << ", length " << m.length << ", delta_v " << m.delta_v << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const RunConflict& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kRunFailure;
  }
}
