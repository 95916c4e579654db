#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sflab/inspection.hpp"
#include "sflab/lander.hpp"

using namespace sflab;
using namespace sflab::env;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

LanderState hovering(double y = 0.5) {
  LanderState s;
  s.y = y;
  return s;
}

}  // namespace

TEST(Lander, FreeFallOneStep) {
  const LanderConfig cfg;
  const auto tr = lander_step(hovering(), {0.0, 0.0}, cfg);
  EXPECT_DOUBLE_EQ(tr.next.vy, -cfg.gravity * cfg.dt);
  EXPECT_DOUBLE_EQ(tr.next.y, 0.5 - cfg.gravity * cfg.dt * cfg.dt);
  EXPECT_EQ(tr.next.x, 0.0);
  EXPECT_EQ(tr.outcome, LanderOutcome::kFlying);
  EXPECT_EQ(tr.phi[2], 0.0);
  EXPECT_EQ(tr.phi[3], 0.0);
}

TEST(Lander, HoverThrottleCancelsGravity) {
  const LanderConfig cfg;
  const auto tr = lander_step(hovering(), {cfg.gravity / cfg.main_power, 0.0}, cfg);
  EXPECT_NEAR(tr.next.vy, 0.0, 1e-15);
  EXPECT_NEAR(tr.next.y, 0.5, 1e-15);
  EXPECT_NEAR(tr.phi[2], -0.3 * cfg.gravity / cfg.main_power, 1e-15);
}

TEST(Lander, SideThrustHandStep) {
  const LanderConfig cfg;
  const auto tr = lander_step(hovering(), {0.0, 1.0}, cfg);
  // Upright: side engine pushes +x and spins the craft negatively.
  EXPECT_DOUBLE_EQ(tr.next.vx, cfg.side_power * cfg.dt);
  EXPECT_DOUBLE_EQ(tr.next.x, cfg.side_power * cfg.dt * cfg.dt);
  EXPECT_DOUBLE_EQ(tr.next.angular_velocity, -cfg.torque_coefficient * cfg.side_power * cfg.dt);
  EXPECT_DOUBLE_EQ(tr.phi[3], -0.03);
}

TEST(Lander, ShapingIsPotentialDifference) {
  const LanderConfig cfg;
  LanderState s = hovering(0.8);
  s.x = 0.1;
  s.vx = -0.05;
  const auto tr = lander_step(s, {0.5, -0.2}, cfg);
  EXPECT_NEAR(tr.phi[1], lander_potential(tr.next, cfg) - lander_potential(s, cfg), 1e-14);
  EXPECT_DOUBLE_EQ(lander_potential(LanderState{}, cfg), 0.0);
}

TEST(Lander, Outcomes) {
  const LanderConfig cfg;
  LanderState soft = hovering(0.001);
  soft.vy = -0.05;
  auto tr = lander_step(soft, {0.0, 0.0}, cfg);
  EXPECT_EQ(tr.outcome, LanderOutcome::kLanded);
  EXPECT_EQ(tr.phi[0], 1.0);
  EXPECT_TRUE(tr.next.left_contact && tr.next.right_contact);

  LanderState hard = hovering(0.01);
  hard.vy = -1.0;
  tr = lander_step(hard, {0.0, 0.0}, cfg);
  EXPECT_EQ(tr.outcome, LanderOutcome::kCrashed);
  EXPECT_EQ(tr.phi[0], -1.0);

  LanderState tilted = soft;
  tilted.angle = 0.5;
  EXPECT_EQ(lander_step(tilted, {0.0, 0.0}, cfg).outcome, LanderOutcome::kCrashed);

  LanderState away = hovering(0.5);
  away.x = 0.999;
  away.vx = 1.0;
  EXPECT_EQ(lander_step(away, {0.0, 0.0}, cfg).outcome, LanderOutcome::kCrashed);
}

TEST(Lander, ActionMapping) {
  const auto a = lander_action_from_agent(vec2(-0.4, 0.7));
  EXPECT_EQ(a.main, 0.0);
  EXPECT_EQ(a.side, 0.7);
  EXPECT_EQ(lander_action_from_agent(vec2(0.6, -1.0)).main, 0.6);
  EXPECT_THROW(lander_action_from_agent(Vector::Zero(3)), DimensionError);
}

TEST(Lander, ResetWithinSpawnBox) {
  const LanderConfig cfg;
  Rng rng = make_rng(1);
  for (int k = 0; k < 500; ++k) {
    const LanderState s = lander_reset(rng, cfg);
    EXPECT_EQ(s.y, cfg.spawn_height);
    EXPECT_LE(std::abs(s.x), cfg.spawn_x);
    for (double v : {s.vx, s.vy, s.angle, s.angular_velocity}) EXPECT_LE(std::abs(v), cfg.spawn_jitter);
    EXPECT_EQ(s.fuel_used, 0.0);
  }
  const LanderState a = lander_reset(42, cfg), b = lander_reset(42, cfg);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.angle, b.angle);
}

TEST(Lander, ControllerOverridesOnlyWhenTriggered) {
  LanderState calm = hovering(0.6);
  const LanderAction proposed{0.4, -0.3};
  const auto pass = secondary_controller(calm, proposed);
  EXPECT_FALSE(pass.active);
  EXPECT_EQ(pass.action.main, 0.4);
  EXPECT_EQ(pass.action.side, -0.3);

  LanderState drifting = calm;
  drifting.x = 0.35;
  drifting.vy = -0.1;
  const auto out = secondary_controller(drifting, proposed);
  EXPECT_TRUE(out.active);
  EXPECT_EQ(out.action.main, 1.0);
  EXPECT_DOUBLE_EQ(out.action.side, std::clamp(-2.0 * 0.35, -1.0, 1.0));

  LanderState rising = drifting;
  rising.vy = 0.1;
  EXPECT_EQ(secondary_controller(rising, proposed).action.main, 0.0);
}

TEST(LanderEnv, FuelAccountingAndRewardOracle) {
  LanderEnv env;
  Rng rng = make_rng(2);
  env.reset(rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector w(4);
  w << 0.3, 1.0, 0.4, 0.3;
  double delta_v = 0.0;
  StepResult r;
  do {
    const LanderState before = env.state();
    r = env.step(vec2(u(rng), u(rng)));
    delta_v += r.delta_v;
    EXPECT_NEAR(r.delta_v, -r.fuel_reward, 1e-12);
    const int outcome = r.terminal ? (r.success ? 1 : -1) : 0;
    EXPECT_NEAR(r.phi.dot(w),
                oracle::lander_reward(before, env.state(), r.executed_action[0], r.executed_action[1], outcome, w),
                1e-12);
  } while (!r.done());
  EXPECT_NEAR(delta_v, env.state().fuel_used, 1e-9);
  EXPECT_THROW(env.step(vec2(0, 0)), Error);
}

TEST(LanderEnv, TruncatesAtStepLimit) {
  LanderConfig cfg;
  cfg.max_steps = 3;
  LanderEnv env(cfg, false);
  Rng rng = make_rng(3);
  env.reset(rng);
  EXPECT_FALSE(env.step(vec2(0.27, 0)).done());
  EXPECT_FALSE(env.step(vec2(0.27, 0)).done());
  const auto r = env.step(vec2(0.27, 0));
  EXPECT_TRUE(r.truncated);
  EXPECT_FALSE(r.terminal);
}

TEST(LanderEnv, ControllerDisabledExecutesProposal) {
  LanderEnv env(LanderConfig{}, false);
  LanderState s = hovering(0.6);
  s.x = 0.5;  // would trigger the controller
  env.set_state(s);
  const auto r = env.step(vec2(0.25, -0.5));
  EXPECT_FALSE(r.intervened);
  EXPECT_EQ(r.executed_action, vec2(0.25, -0.5));
}

TEST(Cw, OriginIsEquilibrium) {
  const CwState out = cw_step(CwState{}, Vec3::Zero(), 100.0, CwParams{});
  EXPECT_TRUE(out.r.isZero(0.0));
  EXPECT_TRUE(out.v.isZero(0.0));
}

TEST(Cw, CrossTrackIsHarmonic) {
  const CwParams p;
  const double n = p.mean_motion;
  CwState s;
  s.r.z() = 40.0;
  s.v.z() = 0.3;
  for (double t : {1.0, 30.0, 600.0, 6000.0}) {
    const CwState out = cw_step(s, Vec3::Zero(), t, p);
    EXPECT_NEAR(out.r.z(), 40.0 * std::cos(n * t) + 0.3 / n * std::sin(n * t), 1e-9);
    EXPECT_NEAR(out.v.z(), -40.0 * n * std::sin(n * t) + 0.3 * std::cos(n * t), 1e-12);
    EXPECT_NEAR(out.r.head<2>().norm(), 0.0, 1e-12);
  }
  // Constant cross-track force: z = a (1 - cos nt) / n^2.
  const CwState pushed = cw_step(CwState{}, Vec3(0, 0, 1.2), 500.0, p);
  EXPECT_NEAR(pushed.r.z(), 0.1 * (1 - std::cos(n * 500.0)) / (n * n), 1e-9);
}

TEST(Cw, StateTransitionSemigroup) {
  const double n = 0.001027;
  const Mat6 lhs = cw_state_transition(n, 70.0);
  const Mat6 rhs = cw_state_transition(n, 30.0) * cw_state_transition(n, 40.0);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(cw_state_transition(n, 0.0).isApprox(Mat6::Identity()));
}

TEST(Cw, MatchesRungeKutta) {
  Rng rng = make_rng(4);
  std::uniform_real_distribution<double> pos(-200, 200), vel(-1, 1), f(-1, 1);
  const CwParams p;
  for (int k = 0; k < 20; ++k) {
    const CwState s{Vec3(pos(rng), pos(rng), pos(rng)), Vec3(vel(rng), vel(rng), vel(rng))};
    const Vec3 force(f(rng), f(rng), f(rng));
    const CwState exact = cw_step(s, force, 30.0, p);
    const CwState rk = oracle::rk4_cw(s, force, 30.0, p.mean_motion, p.mass, 300);
    EXPECT_LT((exact.r - rk.r).norm(), 1e-8);
    EXPECT_LT((exact.v - rk.v).norm(), 1e-10);
  }
}

TEST(Inspection, FibonacciSphereIsUnitAndBalanced) {
  for (int n : {1, 50, 100}) {
    const auto pts = fibonacci_sphere(n);
    ASSERT_EQ(static_cast<int>(pts.size()), n);
    Vec3 sum = Vec3::Zero();
    for (const auto& p : pts) {
      EXPECT_NEAR(p.norm(), 1.0, 1e-14);
      sum += p;
    }
    if (n > 1) {
      EXPECT_LT(sum.norm() / n, 0.05);
    }
  }
  EXPECT_EQ(fibonacci_sphere(7)[3], fibonacci_sphere(7)[3]);
}

TEST(Inspection, ThresholdCount) {
  InspectionConfig cfg;
  EXPECT_EQ(cfg.threshold_count(), 95);
  cfg.num_points = 50;
  EXPECT_EQ(cfg.threshold_count(), 48);
  cfg.tau_points = 100;
  EXPECT_EQ(cfg.threshold_count(), 50);
  cfg.tau_points = 0;
  EXPECT_EQ(cfg.threshold_count(), 0);
}

TEST(Inspection, ConfigValidation) {
  InspectionConfig cfg;
  cfg.tau_points = 120;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = InspectionConfig{};
  cfg.keep_in = 10;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_NO_THROW(InspectionConfig::small().validate());
}

TEST(Inspection, LitAndVisibleHemisphere) {
  const InspectionConfig cfg;
  const auto cloud = fibonacci_sphere(100);
  DeputyState s;
  s.r = Vec3(100, 0, 0);
  s.sun_angle = 0.0;  // sun along +x
  const auto up = update_inspection(s, cloud, cfg);
  int expected = 0;
  for (const auto& p : cloud) expected += p.x() > 0.0 ? 1 : 0;
  EXPECT_EQ(up.newly_inspected, expected);

  s.sun_angle = std::numbers::pi;  // sun behind the chief: nothing lit on the visible side
  EXPECT_EQ(update_inspection(s, cloud, cfg).newly_inspected, 0);

  // Already inspected points are not counted again.
  s.sun_angle = 0.0;
  s.inspected = up.inspected;
  EXPECT_EQ(update_inspection(s, cloud, cfg).newly_inspected, 0);
}

TEST(Inspection, UninspectedCluster) {
  const std::vector<Vec3> cloud{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0)};
  EXPECT_TRUE(uninspected_cluster({false, false, false}, cloud).isApprox(Vec3(0, 1, 0)));
  EXPECT_TRUE(uninspected_cluster({false, true, true}, cloud).isApprox(Vec3(1, 0, 0)));
  EXPECT_TRUE(uninspected_cluster({true, true, true}, cloud).isZero(0.0));
}

TEST(Inspection, FeatureExamples) {
  const InspectionConfig cfg;
  InspectionFeatureInputs in{3, 10, false, Vec3(0.5, -1.0, 0.0), false};
  Vector phi = inspection_features(in, cfg);
  EXPECT_DOUBLE_EQ(phi[0], 0.03);
  EXPECT_EQ(phi[1], 0.0);
  EXPECT_EQ(phi[2], -0.0001);
  EXPECT_DOUBLE_EQ(phi[3], -1.5 * 10.0 / 12.0);
  EXPECT_EQ(phi[4], 0.0);

  in = {2, 95, true, Vec3::Zero(), true};
  phi = inspection_features(in, cfg);
  EXPECT_DOUBLE_EQ(phi[0], 0.03);  // two points plus the completion bonus
  EXPECT_EQ(phi[1], -1.0);
  EXPECT_EQ(phi[3], 0.0);
  EXPECT_EQ(phi[4], -0.01);
}

TEST(Rta, SpeedLimit) {
  const InspectionConfig cfg;
  EXPECT_DOUBLE_EQ(speed_limit(0.0, cfg), 0.2);
  EXPECT_DOUBLE_EQ(speed_limit(100.0, cfg), 0.4);
}

TEST(Rta, SafeProposalPassesThrough) {
  const InspectionConfig cfg;
  const CwState s{Vec3(100, 0, 0), Vec3::Zero()};
  const Vec3 proposed(0.0, 0.01, 0.0);
  const auto out = rta_filter(s, proposed, cfg);
  EXPECT_FALSE(out.active);
  EXPECT_EQ(out.force, proposed);
}

TEST(Rta, OverspeedIsBraked) {
  const InspectionConfig cfg;
  const CwState s{Vec3(100, 0, 0), Vec3(0, 2.0, 0)};
  EXPECT_TRUE(rta_violation(cw_step(s, Vec3::Zero(), cfg.dt, cfg.cw()), cfg));
  const auto out = rta_filter(s, Vec3(0, 1, 0), cfg);
  EXPECT_TRUE(out.active);
  EXPECT_LT(out.force.y(), 0.0);
  EXPECT_LE(out.force.cwiseAbs().maxCoeff(), cfg.thrust_limit);
}

TEST(Rta, CorrectionVanishesWellInsideEnvelope) {
  const InspectionConfig cfg;
  const CwState s{Vec3(200, 0, 0), Vec3(0.05, 0.05, 0)};  // speed well under half the limit
  EXPECT_TRUE(rta_correction(s, cfg).isZero(0.0));
}

TEST(Rta, KeepOutPushesOutward) {
  const InspectionConfig cfg;
  const CwState s{Vec3(0, 0, 16), Vec3(0, 0, -0.3)};
  const Vec3 f = rta_correction(s, cfg);
  EXPECT_GT(f.z(), 0.0);
  EXPECT_TRUE(rta_violation(CwState{Vec3(0, 0, 14), Vec3::Zero()}, cfg));
  EXPECT_TRUE(rta_violation(CwState{Vec3(0, 801, 0), Vec3::Zero()}, cfg));
}

namespace {

InspectionEnv env_at(const InspectionConfig& cfg, bool rta, Vec3 r, Vec3 v, double sun) {
  InspectionEnv env(cfg, rta);
  Rng rng = make_rng(0);
  env.reset(rng);
  DeputyState s;
  s.r = r;
  s.v = v;
  s.sun_angle = sun;
  env.set_state(s);
  return env;
}

}  // namespace

TEST(InspectionEnv, RtaOffExecutesScaledAction) {
  InspectionConfig cfg;
  cfg.thrust_limit = 0.5;
  auto env = env_at(cfg, false, Vec3(100, 0, 0), Vec3(0, 3, 0), 1.0);
  Vector a(3);
  a << 0.4, -2.0, 1.0;
  const auto r = env.step(a);
  EXPECT_FALSE(r.intervened);
  EXPECT_TRUE(r.executed_action.isApprox(Vector((Vector(3) << 0.2, -0.5, 0.5).finished())));
  EXPECT_DOUBLE_EQ(r.delta_v, 1.2 * cfg.dt / cfg.mass);
  EXPECT_EQ(r.phi[3], -r.delta_v);
  EXPECT_EQ(r.fuel_reward, r.phi[3]);
}

TEST(InspectionEnv, HoverDeltaVAccountsForThrustEveryStep) {
  const InspectionConfig cfg;
  auto env = env_at(cfg, false, Vec3(0, 100, 0), Vec3::Zero(), 0.0);
  Vector a(3);
  a << 0.1, 0.0, -0.1;
  double total = 0.0;
  for (int k = 0; k < 5; ++k) total += env.step(a).delta_v;
  EXPECT_NEAR(total, 5 * 0.2 * cfg.dt / cfg.mass, 1e-12);
}

TEST(InspectionEnv, ThresholdTerminationAddsCompletionBonus) {
  InspectionConfig cfg;
  cfg.tau_points = 10.0;
  auto env = env_at(cfg, true, Vec3(100, 0, 0), Vec3::Zero(), 0.0);
  const auto r = env.step(Vector::Zero(3));
  ASSERT_TRUE(r.success);
  EXPECT_TRUE(r.terminal);
  const int seen = env.state().inspected_count();
  EXPECT_GE(seen, cfg.threshold_count());
  EXPECT_DOUBLE_EQ(r.phi[0], 0.01 * (seen + 1));
  EXPECT_THROW(env.step(Vector::Zero(3)), Error);
}

TEST(InspectionEnv, CrashTerminates) {
  const InspectionConfig cfg;
  auto env = env_at(cfg, false, Vec3(11, 0, 0), Vec3(-1.0, 0, 0), std::numbers::pi);
  const auto r = env.step(Vector::Zero(3));
  EXPECT_TRUE(r.terminal);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.phi[1], -1.0);
}

TEST(InspectionEnv, EpisodePropertiesAndRewardOracle) {
  const InspectionConfig cfg = InspectionConfig::small();
  InspectionEnv env(cfg, true);
  Rng rng = make_rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Vector w(5);
  w << 0.5, 1.0, 1.0, 0.3, 0.2;
  env.reset(rng);
  int last = 0;
  StepResult r;
  do {
    const Vector a = (Vector(3) << u(rng), u(rng), u(rng)).finished();
    const std::vector<bool> before = env.state().inspected;
    r = env.step(a);
    const int count = env.state().inspected_count();
    EXPECT_GE(count, last);
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (before[i]) {
        EXPECT_TRUE(env.state().inspected[i]);
      }
    }
    const bool crashed = r.phi[1] < 0.0;
    EXPECT_NEAR(r.phi.dot(w),
                oracle::inspection_reward(count - last, count, cfg.threshold_count(), crashed, r.executed_action,
                                          cfg.dt, cfg.mass, r.intervened, w),
                1e-12);
    EXPECT_EQ(r.phi[4], r.intervened ? -0.01 : 0.0);
    last = count;
    // Observation layout
    EXPECT_TRUE(r.obs.head<3>().isApprox(env.state().r / 100.0));
    EXPECT_EQ(r.obs.segment<3>(3), Vector(env.state().v));
    EXPECT_DOUBLE_EQ(r.obs[6], std::sin(env.state().sun_angle));
    EXPECT_DOUBLE_EQ(r.obs[7], std::cos(env.state().sun_angle));
    EXPECT_DOUBLE_EQ(r.obs[8], static_cast<double>(count) / cfg.num_points);
    EXPECT_EQ(r.obs.tail<3>(), Vector(uninspected_cluster(env.state().inspected, env.cloud())));
  } while (!r.done());
  EXPECT_LE(env.state().t, cfg.max_steps);
}

TEST(InspectionEnv, SunRotatesBackwards) {
  const InspectionConfig cfg;
  auto env = env_at(cfg, false, Vec3(100, 0, 0), Vec3::Zero(), 0.5);
  env.step(Vector::Zero(3));
  EXPECT_NEAR(env.state().sun_angle, 0.5 - cfg.mean_motion * cfg.dt, 1e-15);
  EXPECT_NEAR(wrap_angle(-0.1), 2 * std::numbers::pi - 0.1, 1e-15);
}

TEST(Environment, FactoryAndModes) {
  EXPECT_EQ(parse_rta_mode("on-without-penalty"), RtaMode::kOnWithoutPenalty);
  EXPECT_EQ(to_string(RtaMode::kOff), "off");
  EXPECT_THROW(parse_rta_mode("sometimes"), Error);
  EnvOptions opt;
  opt.id = "inspection";
  opt.preset = "small";
  opt.rta = RtaMode::kOff;
  auto env = make_environment(opt);
  EXPECT_EQ(env->spec().obs_dim, 12);
  EXPECT_FALSE(env->controller_enabled());
  opt.id = "nope";
  EXPECT_THROW(make_environment(opt), Error);
}
