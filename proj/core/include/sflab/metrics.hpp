#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace sflab::metrics {

/// Sum over k of (x[k+1] - x[k]) * (y[k] + y[k+1]) / 2. x strictly increasing.
double trapezoid_auc(std::span<const double> x, std::span<const double> y);

enum class AucNormalization {
  kMinMax,  // (auc - min) / (max - min); all-equal groups map to 1
  kMax,     // auc / max
};

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

/// Normalizes a group of AUC values.
std::map<std::string, double> normalize_aucs(const std::map<std::string, double>& aucs, AucNormalization mode);

/// Trapezoid AUC of each series, then normalize_aucs. All series must share x.
std::map<std::string, double> normalized_auc(const std::map<std::string, Series>& group, AucNormalization mode);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // population (ddof = 0)
  double ci95 = 0.0;    // 1.96 * sample stddev / sqrt(n); 0 when n < 2
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);
double mean(std::span<const double> values);
double stddev(std::span<const double> values, int ddof = 0);

}  // namespace sflab::metrics
