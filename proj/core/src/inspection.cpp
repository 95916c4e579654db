#include "sflab/inspection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sflab::env {

void InspectionConfig::validate() const {
  if (num_points <= 0) throw Error("inspection: num_points must be positive");
  if (tau_points < 0.0 || tau_points > 100.0) throw Error("inspection: tau_points must lie in [0, 100]");
  if (dt <= 0.0) throw Error("inspection: dt must be positive");
  if (!(keep_out < keep_in)) throw Error("inspection: keep-out radius must be below keep-in radius");
  if (chief_radius <= 0.0 || mass <= 0.0 || thrust_limit < 0.0) throw Error("inspection: invalid physical constant");
  if (spawn_min > spawn_max) throw Error("inspection: spawn_min exceeds spawn_max");
}

int InspectionConfig::threshold_count() const {
  return static_cast<int>(std::ceil(tau_points * num_points / 100.0 - 1e-9));
}

InspectionConfig InspectionConfig::small() {
  InspectionConfig c;
  c.num_points = 50;
  c.max_steps = 300;
  c.dt = 30.0;
  return c;
}

std::vector<Vec3> fibonacci_sphere(int n) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    Vec3 p(rho * std::cos(phi), rho * std::sin(phi), z);
    pts.push_back(p.normalized());
  }
  return pts;
}

int DeputyState::inspected_count() const {
  return static_cast<int>(std::count(inspected.begin(), inspected.end(), true));
}

Vec3 sun_direction(double sun_angle) { return {std::cos(sun_angle), std::sin(sun_angle), 0.0}; }

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

Vec3 uninspected_cluster(const std::vector<bool>& inspected, const std::vector<Vec3>& cloud) {
  Vec3 sum = Vec3::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!inspected[i]) sum += cloud[i];
  }
  const double norm = sum.norm();
  return norm > 1e-12 ? Vec3(sum / norm) : Vec3::Zero();
}

InspectionUpdate update_inspection(const DeputyState& s, const std::vector<Vec3>& cloud, const InspectionConfig& cfg) {
  InspectionUpdate out;
  out.inspected = s.inspected;
  out.inspected.resize(cloud.size(), false);
  const double range = s.r.norm();
  if (range > 0.0) {
    const Vec3 r_hat = s.r / range;
    const Vec3 sun = sun_direction(s.sun_angle);
    const double cos_cone = std::cos(cfg.cone_half_angle);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (out.inspected[i]) continue;
      if (cloud[i].dot(r_hat) > cos_cone && cloud[i].dot(sun) > 0.0) {
        out.inspected[i] = true;
        ++out.newly_inspected;
      }
    }
  }
  out.cluster = uninspected_cluster(out.inspected, cloud);
  return out;
}

double speed_limit(double range, const InspectionConfig& cfg) { return cfg.nu0 + cfg.nu1 * range; }

bool rta_violation(const CwState& p, const InspectionConfig& cfg) {
  const double range = p.r.norm();
  return p.v.norm() > speed_limit(range, cfg) || range < cfg.keep_out || range > cfg.keep_in;
}

Vec3 rta_correction(const CwState& s, const InspectionConfig& cfg) {
  const double range = s.r.norm();
  const double speed = s.v.norm();
  const double per_step = cfg.mass / cfg.dt;  // force that removes 1 m/s in one step
  Vec3 force = Vec3::Zero();
  if (speed > 0.0) {
    const double excess = std::max(speed - 0.5 * speed_limit(range, cfg), 0.0);
    force -= (s.v / speed) * std::min(cfg.thrust_limit, per_step * excess);
  }
  if (range > 0.0) {
    const Vec3 r_hat = s.r / range;
    const double radial = s.v.dot(r_hat);
    // Radial pushes engage within one keep-out radius of the keep-out sphere
    // and within 10% of the keep-in boundary.
    if (range < 2.0 * cfg.keep_out) {
      force += r_hat * std::min(cfg.thrust_limit, per_step * (std::max(-radial, 0.0) + 0.5 * cfg.nu0));
    }
    if (range > 0.9 * cfg.keep_in) {
      force -= r_hat * std::min(cfg.thrust_limit, per_step * (std::max(radial, 0.0) + 0.5 * cfg.nu0));
    }
  }
  return force.cwiseMax(-cfg.thrust_limit).cwiseMin(cfg.thrust_limit);
}

RtaOutput rta_filter(const CwState& s, const Vec3& proposed, const InspectionConfig& cfg) {
  const CwState predicted = cw_step(s, proposed, cfg.dt, cfg.cw());
  if (!rta_violation(predicted, cfg)) return {proposed, false};
  const Vec3 corrected = rta_correction(s, cfg);
  return {corrected, corrected != proposed};
}

Vector inspection_features(const InspectionFeatureInputs& in, const InspectionConfig& cfg) {
  Vector phi(5);
  const double chi = in.inspected_after >= cfg.threshold_count() ? 1.0 : 0.0;
  phi[0] = 0.01 * (static_cast<double>(in.newly_inspected) + chi);
  phi[1] = in.crashed ? -1.0 : 0.0;
  phi[2] = -0.0001;
  phi[3] = -in.force.cwiseAbs().sum() * cfg.dt / cfg.mass;
  phi[4] = in.rta_active ? -0.01 : 0.0;
  return phi;
}

InspectionEnv::InspectionEnv(InspectionConfig cfg, bool rta) : cfg_(cfg), rta_(rta) {
  cfg_.validate();
  cloud_ = fibonacci_sphere(cfg_.num_points);
  spec_.id = "inspection";
  spec_.obs_dim = 12;
  spec_.action_dim = 3;
  spec_.feature_names = {"observed", "crash", "time", "delta_v", "rta"};
  spec_.tunable = {true, false, false, true, true};
  spec_.penalty_feature = 4;
}

Vector InspectionEnv::observation() const {
  Vector o(12);
  const Vec3 pc = uninspected_cluster(state_.inspected, cloud_);
  o << state_.r / cfg_.position_scale, state_.v, std::sin(state_.sun_angle), std::cos(state_.sun_angle),
      static_cast<double>(state_.inspected_count()) / cfg_.num_points, pc;
  return o;
}

Vector InspectionEnv::reset(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> radius(cfg_.spawn_min, cfg_.spawn_max);
  std::uniform_real_distribution<double> vel(-cfg_.spawn_speed, cfg_.spawn_speed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  Vec3 dir;
  do {
    dir = Vec3(normal(rng), normal(rng), normal(rng));
  } while (dir.norm() < 1e-9);
  state_ = DeputyState{};
  state_.r = dir.normalized() * radius(rng);
  state_.v = Vec3(vel(rng), vel(rng), vel(rng));
  state_.sun_angle = wrap_angle(angle(rng));
  state_.inspected.assign(static_cast<std::size_t>(cfg_.num_points), false);
  done_ = false;
  return observation();
}

void InspectionEnv::set_state(const DeputyState& s) {
  state_ = s;
  state_.inspected.resize(static_cast<std::size_t>(cfg_.num_points), false);
  done_ = false;
}

StepResult InspectionEnv::step(const Vector& action) {
  if (done_) throw Error("inspection: step after episode end");
  require_dims(action.size(), 3, "inspection action");
  StepResult r;
  r.proposed_action = action;
  const Vec3 proposed = action.cwiseMax(-1.0).cwiseMin(1.0) * cfg_.thrust_limit;
  Vec3 force = proposed;
  if (rta_) {
    const RtaOutput filtered = rta_filter(CwState{state_.r, state_.v}, proposed, cfg_);
    force = filtered.force;
    r.intervened = filtered.active;
  }
  const CwState next = cw_step(CwState{state_.r, state_.v}, force, cfg_.dt, cfg_.cw());
  state_.r = next.r;
  state_.v = next.v;
  state_.sun_angle = wrap_angle(state_.sun_angle - cfg_.mean_motion * cfg_.dt);
  ++state_.t;
  const InspectionUpdate upd = update_inspection(state_, cloud_, cfg_);
  state_.inspected = upd.inspected;
  const int count = state_.inspected_count();
  const double range = state_.r.norm();
  const bool crashed = range < cfg_.chief_radius || range > cfg_.keep_in;

  InspectionFeatureInputs fin{upd.newly_inspected, count, crashed, force, r.intervened};
  r.phi = inspection_features(fin, cfg_);
  r.executed_action = force;
  r.success = count >= cfg_.threshold_count();
  r.terminal = crashed || r.success;
  r.truncated = !r.terminal && state_.t >= cfg_.max_steps;
  r.delta_v = force.cwiseAbs().sum() * cfg_.dt / cfg_.mass;
  r.fuel_reward = r.phi[3];
  r.task_reward = r.phi[0];
  r.obs = observation();
  done_ = r.done();
  return r;
}

std::vector<std::string> InspectionEnv::trace_columns() const {
  return {"t",           "rx",          "ry",          "rz",          "vx",          "vy",
          "vz",          "sun_angle",   "inspected",   "proposed_fx", "proposed_fy", "proposed_fz",
          "executed_fx", "executed_fy", "executed_fz", "active",      "phi_observed", "phi_crash",
          "phi_time",    "phi_delta_v", "phi_rta"};
}

std::vector<double> InspectionEnv::trace_row(const StepResult& r) const {
  std::vector<double> row{static_cast<double>(state_.t), state_.r.x(), state_.r.y(), state_.r.z(),
                          state_.v.x(),  state_.v.y(), state_.v.z(), state_.sun_angle,
                          static_cast<double>(state_.inspected_count())};
  for (int i = 0; i < 3; ++i) row.push_back(r.proposed_action[i] * cfg_.thrust_limit);
  for (int i = 0; i < 3; ++i) row.push_back(r.executed_action[i]);
  row.push_back(r.intervened ? 1.0 : 0.0);
  for (Eigen::Index i = 0; i < r.phi.size(); ++i) row.push_back(r.phi[i]);
  return row;
}

}  // namespace sflab::env
