#pragma once
// Clohessy-Wiltshire relative motion in Hill's frame (x radial, y along-track,
// z cross-track) with zero-order-hold thrust.

#include <Eigen/Core>

namespace sflab::env {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

struct CwParams {
  double mean_motion = 0.001027;  // rad/s
  double mass = 12.0;             // kg
};

/// Closed-form state-transition matrix Phi(t) acting on [r; v].
Mat6 cw_state_transition(double mean_motion, double t);

/// Response of [r; v] after `t` seconds to a unit acceleration held constant
/// on each axis (columns x, y, z).
Mat63 cw_input_matrix(double mean_motion, double t);

struct CwState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

/// Exact propagation over dt with constant force (N) on the deputy.
CwState cw_step(const CwState& state, const Vec3& force, double dt, const CwParams& params);

/// Time derivative of [r; v] under constant force; used by reference integrators.
Vec6 cw_derivative(const Vec6& x, const Vec3& force, const CwParams& params);

}  // namespace sflab::env
