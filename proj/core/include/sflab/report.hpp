#pragma once
// Aggregation of completed run directories into summary tables and plots.

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sflab/csv.hpp"
#include "sflab/metrics.hpp"

namespace sflab::harness {

struct RunData {
  std::filesystem::path dir;
  std::string experiment;
  csv::Table metrics;
};

/// Loads runs; directories without metrics.csv produce a warning and are skipped.
std::vector<RunData> load_runs(const std::vector<std::filesystem::path>& dirs, std::vector<std::string>& warnings);

struct ReportOptions {
  metrics::AucNormalization normalization = metrics::AucNormalization::kMinMax;
  std::string auc_metric = "delta_v";
  /// Aggregate per-seed means instead of every seed x episode value.
  bool per_seed = false;
};

struct AggregateRow {
  std::string experiment;
  long step = 0;
  std::string metric;
  metrics::Summary summary;
};

struct Report {
  std::vector<AggregateRow> rows;  // sorted by experiment, metric, step
  std::map<std::string, double> auc;
  std::map<std::string, double> normalized_auc;
  std::vector<std::string> warnings;
};

/// Values feeding one (experiment, step, metric) cell.
std::vector<double> cell_values(const std::vector<const RunData*>& runs, long step, const std::string& metric,
                                bool per_seed);

Report build_report(const std::vector<RunData>& runs, const ReportOptions& options = {});

void write_summary_csv(const Report& report, std::ostream& os);
void write_auc_csv(const Report& report, std::ostream& os);
/// Experiment x metric rows, one "mean ± std" column per checkpoint, then the AUC table.
std::string format_report_text(const Report& report);

struct PlotRow {
  std::string experiment;
  long step = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

/// Mean line and 95% interval per experiment and checkpoint.
std::vector<PlotRow> plot_data(const std::vector<RunData>& runs, const std::string& metric, bool per_seed = false);
void write_plot_csv(const std::vector<PlotRow>& rows, std::ostream& os);
std::string render_svg(const std::vector<PlotRow>& rows, const std::string& metric);

}  // namespace sflab::harness
