#pragma once
// Planar multi-objective lunar lander with an intervening secondary controller.
//
// Coordinates are normalized: ground at y = 0, landing pad at x = 0. The
// feature vector is [terminal, shaping, main fuel, side fuel].

#include <cstdint>

#include "sflab/environment.hpp"

namespace sflab::env {

struct LanderConfig {
  double gravity = 1.62;
  double main_power = 6.0;
  double side_power = 0.6;
  double torque_coefficient = 4.0;  // kappa
  double dt = 0.05;
  int max_steps = 500;
  double spawn_height = 1.0;
  double spawn_x = 0.3;       // x ~ U(-spawn_x, spawn_x)
  double spawn_jitter = 0.05;  // velocities and angle ~ U(-jitter, jitter)
  double shaping_scale = 10.0;
  double landing_speed = 0.2;
  double landing_angle = 0.3;
  double bound_x = 1.0;
};

struct LanderState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double angle = 0.0;
  double angular_velocity = 0.0;
  bool left_contact = false;
  bool right_contact = false;
  double fuel_used = 0.0;  // accumulated velocity change from both engines
};

struct LanderAction {
  double main = 0.0;  // [0, 1]
  double side = 0.0;  // [-1, 1]
};

struct ControllerOutput {
  LanderAction action;
  bool active = false;
};

/// Overwrites both throttles whenever the trigger predicate holds.
ControllerOutput secondary_controller(const LanderState& s, const LanderAction& proposed);
bool controller_triggers(const LanderState& s);

/// Agent output in [-1, 1]^2 to throttles: main = clamp(u0, 0, 1), side = u1.
LanderAction lander_action_from_agent(const Vector& u);

/// Potential used by the shaping feature (higher is better).
double lander_potential(const LanderState& s, const LanderConfig& cfg);

enum class LanderOutcome { kFlying, kLanded, kCrashed };

struct LanderTransition {
  LanderState next;
  Vector phi;  // 4 features
  LanderOutcome outcome = LanderOutcome::kFlying;
};

/// One integrator step with executed throttles, then contact resolution.
LanderTransition lander_step(const LanderState& s, const LanderAction& a, const LanderConfig& cfg);

LanderState lander_reset(Rng& rng, const LanderConfig& cfg);
LanderState lander_reset(std::uint64_t seed, const LanderConfig& cfg = {});

class LanderEnv final : public Environment {
 public:
  explicit LanderEnv(LanderConfig cfg = {}, bool controller = true);

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(Rng& rng) override;
  StepResult step(const Vector& action) override;
  void set_controller_enabled(bool enabled) override { controller_ = enabled; }
  bool controller_enabled() const override { return controller_; }
  std::vector<std::string> trace_columns() const override;
  std::vector<double> trace_row(const StepResult& result) const override;

  const LanderState& state() const { return state_; }
  void set_state(const LanderState& s);
  const LanderConfig& config() const { return cfg_; }
  Vector observation() const;

 private:
  LanderConfig cfg_;
  bool controller_;
  EnvSpec spec_;
  LanderState state_;
  int t_ = 0;
  bool done_ = true;
};

}  // namespace sflab::env
