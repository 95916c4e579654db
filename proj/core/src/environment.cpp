#include "sflab/environment.hpp"

#include "sflab/inspection.hpp"
#include "sflab/lander.hpp"

namespace sflab::env {

std::string to_string(RtaMode mode) {
  switch (mode) {
    case RtaMode::kOff:
      return "off";
    case RtaMode::kOn:
      return "on";
    case RtaMode::kOnWithoutPenalty:
      return "on-without-penalty";
  }
  return "?";
}

RtaMode parse_rta_mode(const std::string& text) {
  if (text == "off") return RtaMode::kOff;
  if (text == "on") return RtaMode::kOn;
  if (text == "on-without-penalty") return RtaMode::kOnWithoutPenalty;
  throw Error("unknown rta mode '" + text + "' (expected off, on, on-without-penalty)");
}

std::unique_ptr<Environment> make_environment(const EnvOptions& options) {
  const bool controller = options.rta != RtaMode::kOff;
  if (options.id == "lander") {
    if (options.preset != "default") throw Error("lander has no preset '" + options.preset + "'");
    LanderConfig cfg;
    if (options.max_steps > 0) cfg.max_steps = options.max_steps;
    return std::make_unique<LanderEnv>(cfg, controller);
  }
  if (options.id == "inspection") {
    InspectionConfig cfg;
    if (options.preset == "small") {
      cfg = InspectionConfig::small();
    } else if (options.preset != "default") {
      throw Error("inspection has no preset '" + options.preset + "'");
    }
    if (options.max_steps > 0) cfg.max_steps = options.max_steps;
    return std::make_unique<InspectionEnv>(cfg, controller);
  }
  throw Error("unknown environment '" + options.id + "' (expected lander or inspection)");
}

}  // namespace sflab::env
