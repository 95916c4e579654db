#include "sflab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "sflab/config.hpp"
#include "sflab/experiment.hpp"

namespace sflab::harness {

namespace fs = std::filesystem;

namespace {

std::map<std::string, std::vector<const RunData*>> group_runs(const std::vector<RunData>& runs) {
  std::map<std::string, std::vector<const RunData*>> groups;
  for (const RunData& r : runs) groups[r.experiment].push_back(&r);
  return groups;
}

std::vector<long> steps_of(const std::vector<const RunData*>& runs) {
  std::set<long> steps;
  for (const RunData* r : runs) {
    for (std::size_t i = 0; i < r->metrics.rows.size(); ++i) steps.insert(static_cast<long>(r->metrics.number(i, "step")));
  }
  return {steps.begin(), steps.end()};
}

std::string fixed(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<RunData> load_runs(const std::vector<fs::path>& dirs, std::vector<std::string>& warnings) {
  std::vector<RunData> runs;
  for (const fs::path& dir : dirs) {
    const fs::path metrics = dir / "metrics.csv";
    if (!fs::exists(metrics)) {
      warnings.push_back("skipping " + dir.string() + ": no metrics.csv");
      continue;
    }
    RunData run;
    run.dir = dir;
    run.metrics = csv::read(metrics);
    const fs::path snap = dir / "config.snapshot";
    if (fs::exists(snap)) {
      std::ifstream in(snap);
      std::stringstream text;
      text << in.rdbuf();
      run.experiment = parse_config(text.str()).label();
    } else {
      run.experiment = dir.filename().string();
      warnings.push_back(dir.string() + ": no config.snapshot, using the directory name");
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<double> cell_values(const std::vector<const RunData*>& runs, long step, const std::string& metric,
                                bool per_seed) {
  std::vector<double> values;
  std::map<std::pair<std::size_t, long>, std::vector<double>> by_seed;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const csv::Table& t = runs[k]->metrics;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (static_cast<long>(t.number(i, "step")) != step) continue;
      const double v = t.number(i, metric);
      if (per_seed) {
        by_seed[{k, static_cast<long>(t.number(i, "seed"))}].push_back(v);
      } else {
        values.push_back(v);
      }
    }
  }
  for (const auto& [key, v] : by_seed) values.push_back(metrics::mean(v));
  return values;
}

Report build_report(const std::vector<RunData>& runs, const ReportOptions& options) {
  Report report;
  const auto groups = group_runs(runs);
  std::map<std::string, metrics::Series> auc_series;
  for (const auto& [name, members] : groups) {
    const std::vector<long> steps = steps_of(members);
    for (const char* metric : kMetricNames) {
      for (long step : steps) {
        const auto values = cell_values(members, step, metric, options.per_seed);
        report.rows.push_back({name, step, metric, metrics::summarize(values)});
        if (metric == options.auc_metric) {
          auc_series[name].x.push_back(static_cast<double>(step));
          auc_series[name].y.push_back(report.rows.back().summary.mean);
        }
      }
    }
  }
  try {
    std::map<std::string, double> raw;
    for (const auto& [name, s] : auc_series) {
      if (s.x.size() >= 2) raw[name] = metrics::trapezoid_auc(s.x, s.y);
    }
    if (!raw.empty()) {
      report.auc = raw;
      std::map<std::string, metrics::Series> usable;
      for (const auto& [name, s] : auc_series) {
        if (raw.count(name)) usable[name] = s;
      }
      report.normalized_auc = metrics::normalized_auc(usable, options.normalization);
    }
  } catch (const Error& e) {
    report.warnings.push_back(std::string("normalized AUC unavailable: ") + e.what());
  }
  return report;
}

void write_summary_csv(const Report& report, std::ostream& os) {
  csv::write_row(os, {"experiment", "metric", "step", "mean", "stddev", "ci95", "n"});
  for (const AggregateRow& r : report.rows) {
    csv::write_row(os, {csv::field(r.experiment), r.metric, std::to_string(r.step), csv::field(r.summary.mean),
                        csv::field(r.summary.stddev), csv::field(r.summary.ci95), std::to_string(r.summary.n)});
  }
}

void write_auc_csv(const Report& report, std::ostream& os) {
  csv::write_row(os, {"experiment", "auc", "normalized_auc"});
  for (const auto& [name, v] : report.normalized_auc) {
    csv::write_row(os, {csv::field(name), csv::field(report.auc.at(name)), csv::field(v)});
  }
}

std::string format_report_text(const Report& report) {
  std::set<long> step_set;
  for (const auto& r : report.rows) step_set.insert(r.step);
  const std::vector<long> steps(step_set.begin(), step_set.end());

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"experiment", "metric"};
  for (long s : steps) header.push_back(std::to_string(s));
  table.push_back(header);
  std::map<std::pair<std::string, std::string>, std::map<long, std::string>> cells;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : report.rows) {
    const auto key = std::make_pair(r.experiment, r.metric);
    if (!cells.count(key)) order.push_back(key);
    cells[key][r.step] = fixed(r.summary.mean, 2) + " ± " + fixed(r.summary.stddev, 2);
  }
  for (const auto& key : order) {
    std::vector<std::string> row{key.first, key.second};
    for (long s : steps) row.push_back(cells[key].count(s) ? cells[key][s] : "-");
    table.push_back(row);
  }

  // "±" is two bytes but one column wide.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], width(row[i]));
  }
  std::ostringstream os;
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << row[i] << std::string(widths[i] - width(row[i]) + (i + 1 < row.size() ? 2 : 0), ' ');
    }
    os << '\n';
  }
  if (!report.normalized_auc.empty()) {
    os << "\nNormalized AUC\n";
    std::size_t w = 0;
    for (const auto& [name, v] : report.normalized_auc) w = std::max(w, width(name));
    std::vector<std::pair<std::string, double>> sorted(report.normalized_auc.begin(), report.normalized_auc.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [name, v] : sorted) os << name << std::string(w - width(name) + 2, ' ') << fixed(v, 2) << '\n';
  }
  for (const auto& warning : report.warnings) os << "warning: " << warning << '\n';
  return os.str();
}

std::vector<PlotRow> plot_data(const std::vector<RunData>& runs, const std::string& metric, bool per_seed) {
  bool known = false;
  for (const char* m : kMetricNames) known = known || metric == m;
  if (!known) {
    std::string list;
    for (const char* m : kMetricNames) list += (list.empty() ? "" : ", ") + std::string(m);
    throw Error("unknown metric '" + metric + "'; available: " + list);
  }
  std::vector<PlotRow> rows;
  for (const auto& [name, members] : group_runs(runs)) {
    for (long step : steps_of(members)) {
      const auto s = metrics::summarize(cell_values(members, step, metric, per_seed));
      rows.push_back({name, step, s.mean, s.mean - s.ci95, s.mean + s.ci95, s.n});
    }
  }
  return rows;
}

void write_plot_csv(const std::vector<PlotRow>& rows, std::ostream& os) {
  csv::write_row(os, {"experiment", "step", "mean", "ci_low", "ci_high", "n"});
  for (const PlotRow& r : rows) {
    csv::write_row(os, {csv::field(r.experiment), std::to_string(r.step), csv::field(r.mean), csv::field(r.ci_low),
                        csv::field(r.ci_high), std::to_string(r.n)});
  }
}

std::string render_svg(const std::vector<PlotRow>& rows, const std::string& metric) {
  constexpr double kWidth = 800, kHeight = 480, kLeft = 80, kRight = 220, kTop = 40, kBottom = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!rows.empty()) {
    x0 = x1 = static_cast<double>(rows.front().step);
    y0 = rows.front().ci_low;
    y1 = rows.front().ci_high;
    for (const auto& r : rows) {
      x0 = std::min(x0, static_cast<double>(r.step));
      x1 = std::max(x1, static_cast<double>(r.step));
      y0 = std::min(y0, r.ci_low);
      y1 = std::max(y1, r.ci_high);
    }
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"16\">" << xml_escape(metric) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << px(fx) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << fx << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">" << fy << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">step</text>\n";

  std::map<std::string, std::vector<const PlotRow*>> series;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (!series.count(r.experiment)) order.push_back(r.experiment);
    series[r.experiment].push_back(&r);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& pts = series[order[i]];
    const char* color = kColors[i % std::size(kColors)];
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (const PlotRow* p : pts) os << px(static_cast<double>(p->step)) << ',' << py(p->ci_high) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      os << px(static_cast<double>((*it)->step)) << ',' << py((*it)->ci_low) << ' ';
    }
    os << "\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const PlotRow* p : pts) os << px(static_cast<double>(p->step)) << ',' << py(p->mean) << ' ';
    os << "\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(i);
    os << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kWidth - kRight + 32
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 38 << "\" y=\"" << ly << "\">" << xml_escape(order[i]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sflab::harness
