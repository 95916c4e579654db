#pragma once
// Inspection3D: a deputy inspects an illuminated spherical chief under CW
// dynamics, with a runtime-assurance filter on the commanded thrust.
//
// Feature vector: [R_O observed points, R_C crash, R_T time, R_dv fuel, R_A RTA].
// Observation: [r / 100 (3), v (3), sin theta_S, cos theta_S, P_i / N, P_c (3)].

#include <cstdint>
#include <vector>

#include "sflab/cw.hpp"
#include "sflab/environment.hpp"

namespace sflab::env {

struct InspectionConfig {
  int num_points = 100;
  double tau_points = 95.0;  // percent of points required for success
  int max_steps = 1200;
  double dt = 10.0;
  double mean_motion = 0.001027;
  double mass = 12.0;
  double thrust_limit = 1.0;  // N per axis
  double chief_radius = 10.0;
  double keep_out = 15.0;
  double keep_in = 800.0;
  double nu0 = 0.2;
  double nu1 = 0.002;
  double cone_half_angle = 1.5707963267948966;  // rad
  double spawn_min = 50.0;
  double spawn_max = 150.0;
  double spawn_speed = 0.05;  // each velocity component ~ U(-spawn_speed, spawn_speed)
  double position_scale = 100.0;

  void validate() const;
  /// Number of inspected points at which the episode succeeds.
  int threshold_count() const;
  CwParams cw() const { return {mean_motion, mass}; }
  /// Smaller scaled preset: 50 points, 300 steps, 30 s steps.
  static InspectionConfig small();
};

/// Deterministic Fibonacci-sphere lattice of unit vectors.
std::vector<Vec3> fibonacci_sphere(int n);

struct DeputyState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double sun_angle = 0.0;  // [0, 2 pi)
  std::vector<bool> inspected;
  int t = 0;

  int inspected_count() const;
};

Vec3 sun_direction(double sun_angle);
double wrap_angle(double a);

struct InspectionUpdate {
  std::vector<bool> inspected;
  int newly_inspected = 0;
  Vec3 cluster = Vec3::Zero();  // P_c
};

/// Marks points facing the deputy (within the cone) and lit by the sun.
InspectionUpdate update_inspection(const DeputyState& s, const std::vector<Vec3>& cloud, const InspectionConfig& cfg);
/// Normalized mean of uninspected normals; zero if none remain.
Vec3 uninspected_cluster(const std::vector<bool>& inspected, const std::vector<Vec3>& cloud);

double speed_limit(double range, const InspectionConfig& cfg);

struct RtaOutput {
  Vec3 force = Vec3::Zero();
  bool active = false;
};

/// Analytic correction from the current state, independent of any proposal.
Vec3 rta_correction(const CwState& s, const InspectionConfig& cfg);
bool rta_violation(const CwState& predicted, const InspectionConfig& cfg);
/// One-step look-ahead; unsafe proposals are replaced by rta_correction.
RtaOutput rta_filter(const CwState& s, const Vec3& proposed, const InspectionConfig& cfg);

struct InspectionFeatureInputs {
  int newly_inspected = 0;
  int inspected_after = 0;
  bool crashed = false;  // crash or exit
  Vec3 force = Vec3::Zero();
  bool rta_active = false;
};

Vector inspection_features(const InspectionFeatureInputs& in, const InspectionConfig& cfg);

class InspectionEnv final : public Environment {
 public:
  explicit InspectionEnv(InspectionConfig cfg = {}, bool rta = true);

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(Rng& rng) override;
  StepResult step(const Vector& action) override;
  void set_controller_enabled(bool enabled) override { rta_ = enabled; }
  bool controller_enabled() const override { return rta_; }
  std::vector<std::string> trace_columns() const override;
  std::vector<double> trace_row(const StepResult& result) const override;

  const DeputyState& state() const { return state_; }
  void set_state(const DeputyState& s);
  const InspectionConfig& config() const { return cfg_; }
  const std::vector<Vec3>& cloud() const { return cloud_; }
  Vector observation() const;

 private:
  InspectionConfig cfg_;
  bool rta_;
  EnvSpec spec_;
  std::vector<Vec3> cloud_;
  DeputyState state_;
  bool done_ = true;
};

}  // namespace sflab::env
