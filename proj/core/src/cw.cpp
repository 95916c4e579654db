#include "sflab/cw.hpp"

#include <cmath>

namespace sflab::env {

Mat6 cw_state_transition(double n, double t) {
  const double s = std::sin(n * t);
  const double c = std::cos(n * t);
  const double h = std::sin(0.5 * n * t);
  const double omc = 2.0 * h * h;  // 1 - cos(nt) without cancellation
  Mat6 m;
  // clang-format off
  m << 4 - 3 * c,          0, 0,      s / n,              2 * omc / n,       0,
       6 * (s - n * t),    1, 0,      -2 * omc / n,   (4 * s - 3 * n * t) / n, 0,
       0,                  0, c,      0,                  0,                     s / n,
       3 * n * s,          0, 0,      c,                  2 * s,                 0,
       -6 * n * omc,   0, 0,      -2 * s,             4 * c - 3,             0,
       0,                  0, -n * s, 0,                  0,                     c;
  // clang-format on
  return m;
}

Mat63 cw_input_matrix(double n, double t) {
  const double s = std::sin(n * t);
  const double h = std::sin(0.5 * n * t);
  const double omc = 2.0 * h * h;  // 1 - cos(nt) without cancellation
  const double n2 = n * n;
  Mat63 g;
  // clang-format off
  g << omc / n2,                 2 * (t - s / n) / n,                  0,
       -2 * (t - s / n) / n,         4 * omc / n2 - 1.5 * t * t,       0,
       0,                            0,                                    omc / n2,
       s / n,                        2 * omc / n,                      0,
       -2 * omc / n,             4 * s / n - 3 * t,                    0,
       0,                            0,                                    s / n;
  // clang-format on
  return g;
}

CwState cw_step(const CwState& state, const Vec3& force, double dt, const CwParams& params) {
  Vec6 x;
  x << state.r, state.v;
  const Vec6 next =
      cw_state_transition(params.mean_motion, dt) * x + cw_input_matrix(params.mean_motion, dt) * (force / params.mass);
  return CwState{next.head<3>(), next.tail<3>()};
}

Vec6 cw_derivative(const Vec6& x, const Vec3& force, const CwParams& params) {
  const double n = params.mean_motion;
  const Vec3 acc = force / params.mass;
  Vec6 dx;
  dx.head<3>() = x.tail<3>();
  dx[3] = 3 * n * n * x[0] + 2 * n * x[4] + acc[0];
  dx[4] = -2 * n * x[3] + acc[1];
  dx[5] = -n * n * x[2] + acc[2];
  return dx;
}

}  // namespace sflab::env
