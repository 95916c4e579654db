#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sflab/config.hpp"

namespace sflab::harness {

/// Axes of the ablation grid; an empty axis keeps the base config's value.
struct AblationAxes {
  std::vector<agent::Architecture> architectures;
  std::vector<agent::AgentType> agent_types;
  std::vector<env::RtaMode> rta_modes;
  std::vector<std::pair<double, double>> weight_ranges;  // generalists only
};

/// Cartesian expansion, each config named by its label. Specialists ignore
/// the weight-range axis, so they appear once per remaining combination.
std::vector<ExperimentConfig> ablation_matrix(const ExperimentConfig& base, const AblationAxes& axes);

/// RQ1 (stacked vs collapsed), RQ2 (controller ablation), RQ3 (weight ranges).
AblationAxes preset_axes(const std::string& name);

}  // namespace sflab::harness
