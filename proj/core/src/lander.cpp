#include "sflab/lander.hpp"

#include <algorithm>
#include <cmath>

namespace sflab::env {

bool controller_triggers(const LanderState& s) {
  return std::abs(s.x) > 0.3 || ((-0.8 * s.vy > s.y) && (s.x > 0.03)) || std::abs(s.angle) > 0.4;
}

ControllerOutput secondary_controller(const LanderState& s, const LanderAction& proposed) {
  if (!controller_triggers(s)) return {proposed, false};
  LanderAction out;
  out.side = std::clamp(10.0 * s.angle + 3.0 * s.angular_velocity - 2.0 * s.x - 4.0 * s.vx, -1.0, 1.0);
  out.main = s.vy > -0.001 ? 0.0 : 1.0;
  return {out, true};
}

LanderAction lander_action_from_agent(const Vector& u) {
  require_dims(u.size(), 2, "lander action");
  return {std::clamp(u[0], 0.0, 1.0), std::clamp(u[1], -1.0, 1.0)};
}

double lander_potential(const LanderState& s, const LanderConfig& cfg) {
  return -cfg.shaping_scale * (std::hypot(s.x, s.y) + std::hypot(s.vx, s.vy) + std::abs(s.angle));
}

LanderTransition lander_step(const LanderState& s, const LanderAction& a, const LanderConfig& cfg) {
  const double main = std::clamp(a.main, 0.0, 1.0);
  const double side = std::clamp(a.side, -1.0, 1.0);
  const double sin_d = std::sin(s.angle);
  const double cos_d = std::cos(s.angle);
  const double ax = cfg.main_power * main * -sin_d + cfg.side_power * side * cos_d;
  const double ay = cfg.main_power * main * cos_d + cfg.side_power * side * sin_d - cfg.gravity;
  const double alpha = -cfg.torque_coefficient * cfg.side_power * side;

  LanderTransition out;
  LanderState& n = out.next;
  n = s;
  n.vx = s.vx + ax * cfg.dt;
  n.vy = s.vy + ay * cfg.dt;
  n.angular_velocity = s.angular_velocity + alpha * cfg.dt;
  n.x = s.x + n.vx * cfg.dt;
  n.y = s.y + n.vy * cfg.dt;
  n.angle = s.angle + n.angular_velocity * cfg.dt;
  n.fuel_used = s.fuel_used + (cfg.main_power * main + cfg.side_power * std::abs(side)) * cfg.dt;

  if (n.y <= 0.0) {
    n.y = 0.0;
    const bool upright = std::abs(n.angle) < cfg.landing_angle;
    n.left_contact = upright || n.angle > 0.0;
    n.right_contact = upright || n.angle < 0.0;
    out.outcome = (upright && std::abs(n.vy) < cfg.landing_speed) ? LanderOutcome::kLanded : LanderOutcome::kCrashed;
  } else if (std::abs(n.x) > cfg.bound_x) {
    out.outcome = LanderOutcome::kCrashed;
  }

  out.phi.resize(4);
  out.phi[0] = out.outcome == LanderOutcome::kLanded ? 1.0 : out.outcome == LanderOutcome::kCrashed ? -1.0 : 0.0;
  out.phi[1] = lander_potential(n, cfg) - lander_potential(s, cfg);
  out.phi[2] = -0.3 * main;
  out.phi[3] = -0.03 * std::abs(side);
  return out;
}

LanderState lander_reset(Rng& rng, const LanderConfig& cfg) {
  std::uniform_real_distribution<double> spawn(-cfg.spawn_x, cfg.spawn_x);
  std::uniform_real_distribution<double> jitter(-cfg.spawn_jitter, cfg.spawn_jitter);
  LanderState s;
  s.y = cfg.spawn_height;
  s.x = spawn(rng);
  s.vx = jitter(rng);
  s.vy = jitter(rng);
  s.angle = jitter(rng);
  s.angular_velocity = jitter(rng);
  return s;
}

LanderState lander_reset(std::uint64_t seed, const LanderConfig& cfg) {
  Rng rng = make_rng(seed);
  return lander_reset(rng, cfg);
}

LanderEnv::LanderEnv(LanderConfig cfg, bool controller) : cfg_(cfg), controller_(controller) {
  spec_.id = "lander";
  spec_.obs_dim = 8;
  spec_.action_dim = 2;
  spec_.feature_names = {"terminal", "shaping", "main_fuel", "side_fuel"};
  spec_.tunable = {true, false, true, true};
}

Vector LanderEnv::observation() const {
  Vector o(8);
  o << state_.x, state_.y, state_.vx, state_.vy, state_.angle, state_.angular_velocity,
      state_.left_contact ? 1.0 : 0.0, state_.right_contact ? 1.0 : 0.0;
  return o;
}

Vector LanderEnv::reset(Rng& rng) {
  state_ = lander_reset(rng, cfg_);
  t_ = 0;
  done_ = false;
  return observation();
}

void LanderEnv::set_state(const LanderState& s) {
  state_ = s;
  t_ = 0;
  done_ = false;
}

StepResult LanderEnv::step(const Vector& action) {
  if (done_) throw Error("lander: step after episode end");
  StepResult r;
  r.proposed_action = action;
  const LanderAction proposed = lander_action_from_agent(action);
  LanderAction executed = proposed;
  if (controller_) {
    const ControllerOutput c = secondary_controller(state_, proposed);
    executed = c.action;
    r.intervened = c.active;
  }
  const double fuel_before = state_.fuel_used;
  LanderTransition tr = lander_step(state_, executed, cfg_);
  state_ = tr.next;
  ++t_;
  r.executed_action = Vector(2);
  r.executed_action << executed.main, executed.side;
  r.phi = std::move(tr.phi);
  r.terminal = tr.outcome != LanderOutcome::kFlying;
  r.truncated = !r.terminal && t_ >= cfg_.max_steps;
  r.success = tr.outcome == LanderOutcome::kLanded;
  r.delta_v = state_.fuel_used - fuel_before;
  r.fuel_reward = r.phi[2] + r.phi[3];
  r.obs = observation();
  done_ = r.done();
  return r;
}

std::vector<std::string> LanderEnv::trace_columns() const {
  return {"t",          "x",           "y",           "vx",           "vy",       "angle",
          "angular_velocity", "raw_main", "raw_side", "exec_main", "exec_side", "active",
          "phi_terminal", "phi_shaping", "phi_main_fuel", "phi_side_fuel"};
}

std::vector<double> LanderEnv::trace_row(const StepResult& r) const {
  std::vector<double> row{static_cast<double>(t_), state_.x, state_.y, state_.vx, state_.vy, state_.angle,
                          state_.angular_velocity};
  row.push_back(r.proposed_action[0]);
  row.push_back(r.proposed_action[1]);
  row.push_back(r.executed_action[0]);
  row.push_back(r.executed_action[1]);
  row.push_back(r.intervened ? 1.0 : 0.0);
  for (Eigen::Index i = 0; i < r.phi.size(); ++i) row.push_back(r.phi[i]);
  return row;
}

}  // namespace sflab::env
