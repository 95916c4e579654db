#include "sflab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sflab/types.hpp"

namespace sflab::metrics {

double trapezoid_auc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("trapezoid_auc: x and y lengths differ");
  if (x.size() < 2) throw Error("trapezoid_auc: need at least two points");
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (!(x[k + 1] > x[k])) throw Error("trapezoid_auc: x must be strictly increasing");
    area += (x[k + 1] - x[k]) * (y[k] + y[k + 1]) / 2.0;
  }
  return area;
}

std::map<std::string, double> normalize_aucs(const std::map<std::string, double>& aucs, AucNormalization mode) {
  if (aucs.empty()) throw Error("normalized_auc: empty group");
  double lo = aucs.begin()->second;
  double hi = lo;
  for (const auto& [name, v] : aucs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::map<std::string, double> out;
  for (const auto& [name, v] : aucs) {
    if (mode == AucNormalization::kMinMax) {
      out[name] = hi > lo ? (v - lo) / (hi - lo) : 1.0;
    } else {
      if (hi == 0.0) throw Error("normalized_auc: maximum AUC is zero");
      out[name] = v / hi;
    }
  }
  return out;
}

std::map<std::string, double> normalized_auc(const std::map<std::string, Series>& group, AucNormalization mode) {
  if (group.empty()) throw Error("normalized_auc: empty group");
  const std::vector<double>& grid = group.begin()->second.x;
  std::map<std::string, double> aucs;
  for (const auto& [name, s] : group) {
    if (s.x != grid) throw Error("normalized_auc: series '" + name + "' does not share the checkpoint grid");
    aucs[name] = trapezoid_auc(s.x, s.y);
  }
  return normalize_aucs(aucs, mode);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double stddev(std::span<const double> values, int ddof) {
  const auto n = static_cast<double>(values.size());
  if (n - ddof <= 0) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / (n - ddof));
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  s.mean = mean(values);
  s.stddev = stddev(values, 0);
  if (s.n >= 2) s.ci95 = 1.96 * stddev(values, 1) / std::sqrt(static_cast<double>(s.n));
  return s;
}

}  // namespace sflab::metrics
