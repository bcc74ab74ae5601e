#include "fwis/kincontrol.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fwis;

namespace {

constexpr double kPi = std::numbers::pi;

PoseRef straight(double v_t) {
  PoseRef r;
  r.v_t = v_t;
  r.x_dot_d = v_t;
  return r;
}

}  // namespace

TEST(KinControl, PoseErrorInBodyFrame) {
  PoseRef r;
  r.x_d = 1.0;
  auto e = pose_error({}, r);
  EXPECT_EQ(e.e_x, 1.0);
  EXPECT_EQ(e.e_y, 0.0);
  EXPECT_EQ(e.e_theta, 0.0);

  r.theta_d = kPi / 2;
  e = pose_error({0, 0, kPi / 2, 0, 0, 0}, r);
  EXPECT_NEAR(e.e_x, 0.0, 1e-15);
  EXPECT_NEAR(e.e_y, -1.0, 1e-15);
  EXPECT_EQ(e.e_theta, 0.0);

  r = PoseRef{0.3, -0.2, 0.7};
  e = pose_error({0.3, -0.2, 0.7, 5.0, 0.1, 0.2}, r);
  EXPECT_EQ(e.e_x, 0.0);
  EXPECT_EQ(e.e_y, 0.0);
  EXPECT_EQ(e.e_theta, 0.0);

  // Heading error is wrapped unless asked otherwise.
  r = PoseRef{};
  r.theta_d = 3.0;
  EXPECT_NEAR(pose_error({0, 0, -3.0, 0, 0, 0}, r).e_theta, 6.0 - 2 * kPi, 1e-15);
  EXPECT_EQ(pose_error({0, 0, -3.0, 0, 0, 0}, r, false).e_theta, 6.0);
}

TEST(KinControl, TrackingLaw) {
  KinGains g;
  PoseRef r = straight(0.1);
  auto c = tracking_law({}, r, g);
  EXPECT_DOUBLE_EQ(c.v_w_d, 0.1);
  EXPECT_EQ(c.omega_virt, 0.0);

  c = tracking_law({0.1, 0, 0}, r, g);
  EXPECT_DOUBLE_EQ(c.v_w_d, 0.6);

  c = tracking_law({0, 0, kPi / 2}, r, g);
  EXPECT_NEAR(c.v_w_d, 0.0, 1e-16);
}

TEST(KinControl, SteeringMapStraightLine) {
  const auto s = steering_map({}, straight(0.1), {}, {}, 0.1, 0.0);
  EXPECT_EQ(s.delta_f_d, 0.0);
  EXPECT_EQ(s.delta_r_d, 0.0);
  EXPECT_FALSE(s.saturated);
  EXPECT_EQ(s.clamps, 0u);
}

TEST(KinControl, SteeringMapYawSplit) {
  const RobotParams p;
  const auto s = steering_map({}, straight(0.1), {}, p, 0.1, 0.1);
  EXPECT_NEAR(s.s_demand, 0.45, 1e-15);
  EXPECT_NEAR(s.delta_f_d, 0.22694303617851996, 1e-15);
  EXPECT_NEAR(s.delta_r_d, -0.22694303617851996, 1e-15);
  EXPECT_FALSE(s.saturated);
  // The steering difference produces exactly the requested yaw rate.
  EXPECT_NEAR(p.A() * (std::sin(s.delta_f_d) - std::sin(s.delta_r_d)) * 0.1, 0.1, 1e-15);
}

TEST(KinControl, SteeringMapSaturates) {
  const RobotParams p;
  const double omega = 2.6 * p.A() * 0.1;  // front sine demand of 1.3
  auto s = steering_map({}, straight(0.1), {}, p, 0.1, omega);
  EXPECT_TRUE(s.saturated);
  EXPECT_EQ(s.clamps, kClampFront | kClampRear);
  EXPECT_NEAR(s.delta_f_d, kPi / 2, 1e-15);
  EXPECT_NEAR(s.delta_r_d, -kPi / 2, 1e-15);
  EXPECT_LT(s.omega_virt, omega);
  EXPECT_NEAR(s.omega_virt, omega * s.s_achieved / s.s_demand, 1e-12);

  KinGains g;
  g.delta_max = 1.2;
  s = steering_map({}, straight(0.1), g, p, 0.1, omega);
  EXPECT_EQ(s.delta_f_d, 1.2);
  EXPECT_EQ(s.delta_r_d, -1.2);
}

TEST(KinControl, ReversingKeepsAnglesInRange) {
  PoseRef r = straight(-0.1);
  r.x_dot_d = -0.1;
  const auto s = steering_map({}, r, {}, {}, -0.1, 0.05);
  EXPECT_LE(std::abs(s.delta_f_d), kPi / 2);
  EXPECT_LE(std::abs(s.delta_r_d), kPi / 2);
}

TEST(KinControl, SteeringRateLaw) {
  KinGains g;
  auto [wf, wr] = steering_rate_law(0.3, -0.2, 0.3, -0.2, g);
  EXPECT_EQ(wf, 0.0);
  EXPECT_EQ(wr, 0.0);
  std::tie(wf, wr) = steering_rate_law(0.0, 0.0, 0.1, 0.0, g);
  EXPECT_DOUBLE_EQ(wf, 0.5);
  std::tie(wf, wr) = steering_rate_law(0.0, 0.0, 1.0, -1.0, g);
  EXPECT_EQ(wf, kPi / 2);
  EXPECT_EQ(wr, -kPi / 2);
}

TEST(KinControl, RateClampBitsInKinematicCommand) {
  const auto cmd = kinematic_command({0, 0, 0, 0, 1.2, 0}, straight(0.1), {}, {});
  EXPECT_EQ(cmd.clamps & kClampRateFront, kClampRateFront);
  EXPECT_EQ(cmd.clamps & kClampRateRear, 0u);
  EXPECT_FALSE(cmd.saturated);
  EXPECT_EQ(cmd.omega_f_d, -kPi / 2);
}

TEST(KinControl, CrabReferenceSignedSpeed) {
  // Fixed heading, travelling along +y: the wheels point sideways.
  PoseRef r;
  r.v_t = 0.1;
  r.y_dot_d = 0.1;
  const auto cmd = kinematic_command({}, r, {}, {});
  EXPECT_NEAR(cmd.v_w_d, 0.1, 1e-15);
  EXPECT_NEAR(cmd.delta_f_d, kPi / 2, 1e-12);
  EXPECT_NEAR(cmd.delta_r_d, kPi / 2, 1e-12);
}

TEST(KinControl, FilterStepResponse) {
  const KinGains g;
  const RobotParams p;
  const double dt = 1e-3;
  ReferenceState prev;
  prev.primed = true;  // previous command was at rest
  ReferenceState s = reference_step({}, straight(0.1), g, p, prev, dt);
  EXPECT_DOUBLE_EQ(s.v_w_d, 0.1);
  const double peak = s.v_dot_d[0];
  EXPECT_NEAR(peak, 0.1 / dt * dt / (g.tau_ff + dt), 1e-12);
  EXPECT_NEAR(peak, 1.9607843137254901, 1e-12);
  EXPECT_LT(peak, 0.1 / dt);

  // One time constant later the response has dropped by about e.
  for (int i = 0; i < 50; ++i) s = reference_step({}, straight(0.1), g, p, s, dt);
  EXPECT_NEAR(s.v_dot_d[0] / peak, std::exp(-1.0), 5e-3);
  for (int i = 0; i < 2000; ++i) s = reference_step({}, straight(0.1), g, p, s, dt);
  EXPECT_LT(s.v_dot_d.norm(), 1e-12);
}

TEST(KinControl, FirstStepSeedsFilter) {
  const auto s = reference_step({}, straight(0.1), {}, {}, ReferenceState{}, 1e-3);
  EXPECT_TRUE(s.primed);
  EXPECT_EQ(s.v_dot_d, Vec3::Zero());
  EXPECT_THROW(reference_step({}, straight(0.1), {}, {}, s, 0.0), InvalidInput);
}

TEST(KinControl, UnwrapAcrossTwoPi) {
  ReferenceState prev;
  prev.primed = true;
  prev.delta_f_d = 2 * kPi + 0.2;
  const RobotParams p;
  const auto s = reference_step({}, straight(0.1), {}, p, prev, 1e-3);
  EXPECT_LT(std::abs(s.delta_f_d - prev.delta_f_d), kPi);
  EXPECT_NEAR(s.delta_f_d, 2 * kPi, 1e-12);
}

TEST(KinControl, AngleHelpers) {
  EXPECT_DOUBLE_EQ(wrap_angle(3 * kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(7.0), 7.0 - 2 * kPi, 1e-15);
  EXPECT_NEAR(unwrap_near(10.0, 0.0), 4 * kPi, 1e-12);
  EXPECT_EQ(sgn_eps(0.0), 1.0);
  EXPECT_EQ(sgn_eps(-1e-300), -1.0);
}

TEST(KinControl, GainValidation) {
  KinGains g;
  EXPECT_NO_THROW(g.validate());
  g.k_x = 0;
  EXPECT_THROW(g.validate(), InvalidInput);
  g = KinGains{};
  g.delta_max = 2.0;
  EXPECT_THROW(g.validate(), InvalidInput);
  g = KinGains{};
  g.tau_ff = -1;
  EXPECT_THROW(g.validate(), InvalidInput);
}
