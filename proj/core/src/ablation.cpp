#include "sflab/ablation.hpp"

namespace sflab::harness {

std::vector<ExperimentConfig> ablation_matrix(const ExperimentConfig& base, const AblationAxes& axes) {
  const auto archs = axes.architectures.empty() ? std::vector{base.agent.architecture} : axes.architectures;
  const auto types = axes.agent_types.empty() ? std::vector{base.agent.type} : axes.agent_types;
  const auto modes = axes.rta_modes.empty() ? std::vector{base.env.rta} : axes.rta_modes;
  const auto ranges = axes.weight_ranges.empty() ? std::vector{std::pair{base.weight_low, base.weight_high}}
                                                 : axes.weight_ranges;
  std::vector<ExperimentConfig> out;
  for (const auto arch : archs) {
    for (const auto type : types) {
      for (const auto mode : modes) {
        const std::size_t n_ranges = type == agent::AgentType::kSpecialist ? 1 : ranges.size();
        for (std::size_t r = 0; r < n_ranges; ++r) {
          ExperimentConfig cfg = base;
          cfg.agent.architecture = arch;
          cfg.agent.type = type;
          cfg.env.rta = mode;
          if (type == agent::AgentType::kGeneralist) {
            cfg.weight_low = ranges[r].first;
            cfg.weight_high = ranges[r].second;
          }
          cfg.name.clear();
          cfg.name = cfg.label();
          out.push_back(std::move(cfg));
        }
      }
    }
  }
  return out;
}

AblationAxes preset_axes(const std::string& name) {
  using agent::AgentType;
  using agent::Architecture;
  AblationAxes axes;
  if (name == "RQ1") {
    axes.architectures = {Architecture::kStacked, Architecture::kCollapsed};
    axes.agent_types = {AgentType::kGeneralist};
    axes.rta_modes = {env::RtaMode::kOn};
    axes.weight_ranges = {{0.0, 1.0}};
  } else if (name == "RQ2") {
    axes.architectures = {Architecture::kSac, Architecture::kStacked};
    axes.agent_types = {AgentType::kSpecialist, AgentType::kGeneralist};
    axes.rta_modes = {env::RtaMode::kOff, env::RtaMode::kOn, env::RtaMode::kOnWithoutPenalty};
    axes.weight_ranges = {{0.0, 1.0}};
  } else if (name == "RQ3") {
    axes.architectures = {Architecture::kSac, Architecture::kStacked};
    axes.agent_types = {AgentType::kGeneralist};
    axes.rta_modes = {env::RtaMode::kOn};
    axes.weight_ranges = {{0.4, 0.6}, {0.2, 0.8}, {0.0, 1.0}};
  } else {
    throw Error("unknown ablation preset '" + name + "' (expected RQ1, RQ2, RQ3)");
  }
  return axes;
}

}  // namespace sflab::harness
