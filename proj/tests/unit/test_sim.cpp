#include "fwis/config.hpp"
#include "fwis/model.hpp"
#include "fwis/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

using namespace fwis;

namespace {

SimTrace run_cfg(const ExperimentConfig& c) {
  return run(c.sim, c.trajectory, c.kin_gains, c.pi_gains, c.disturbance, c.robot);
}

}  // namespace

TEST(Sim, RhsAtRestWithStraightWheels) {
  const RobotParams p;
  auto r = dynamics_rhs({0, 0, 0.3, 0, 0.2, 0.2}, {0.1, 0, 0}, {}, UncertaintyModel::none(), p, 0);
  EXPECT_EQ(r.v_dot, Vec3::Zero());
  EXPECT_NEAR(r.q_dot[0], 0.1 * std::cos(0.3 + 0.2), 1e-15);

  r = dynamics_rhs({}, {}, {0.01131525590551181, 0, 0}, UncertaintyModel::none(), p, 0);
  EXPECT_NEAR(r.v_dot[0], 1.0, 1e-13);
  EXPECT_EQ(r.v_dot[1], 0.0);
}

TEST(Sim, RhsViscousDeceleration) {
  const auto r = dynamics_rhs({}, {0.1, 0, 0}, {}, UncertaintyModel::viscous(0.0305), {}, 0);
  EXPECT_NEAR(r.v_dot[0], -1.326513747901499, 1e-13);
}

TEST(Sim, Rk4ScalarExponential) {
  auto rhs = [](double, double v) { return -v; };
  const double v1 = rk4_step(1.0, rhs, 0.0, 1e-3);
  EXPECT_NEAR(v1, 0.999000499833375, 1e-15);
  EXPECT_NEAR(v1, std::exp(-1e-3), 1e-16);
  EXPECT_EQ(rk4_step(2.5, [](double, double) { return 0.0; }, 0.0, 0.1), 2.5);
}

TEST(Sim, Rk4IsFourthOrder) {
  auto rhs = [](double t, double v) { return std::cos(t) * v; };
  auto err = [&](int n) {
    double v = 1.0;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) v = rk4_step(v, rhs, i * h, h);
    return std::abs(v - std::exp(std::sin(1.0)));
  };
  const double ratio = err(20) / err(40);
  EXPECT_NEAR(ratio, 16.0, 1.5);
}

TEST(Sim, RowCounts) {
  ExperimentConfig c = preset("table1-floor-flower");
  c.sim.T = 0.0;
  auto tr = run_cfg(c);
  ASSERT_EQ(tr.rows.size(), 1u);
  EXPECT_EQ(tr.rows[0].t, 0.0);

  c.sim.T = 1.0;
  c.sim.record_stride = 10;
  tr = run_cfg(c);
  EXPECT_EQ(tr.rows.size(), 101u);
  EXPECT_EQ(tr.rows.size(), c.sim.expected_rows());
  EXPECT_DOUBLE_EQ(tr.row_spacing(), 0.01);
  EXPECT_EQ(tr.q_d.size(), tr.rows.size());
}

TEST(Sim, NominalFlowerRun) {
  const ExperimentConfig c = preset("table1-floor-flower");
  const SimTrace tr = run_cfg(c);
  ASSERT_EQ(tr.rows.size(), 70001u);
  double worst = 0;
  for (const auto& r : tr.rows) {
    for (double v : {r.q.x, r.q.y, r.v.v_w, r.tau.tau_w, r.V}) ASSERT_TRUE(std::isfinite(v));
    if (r.t >= 5.0) worst = std::max(worst, r.e_v.cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Sim, OnReferenceStartHasNoVelocityError) {
  ExperimentConfig c = preset("table1-floor-flower");
  c.sim.T = 0.0;
  c.sim.initial = InitialMode::on_reference;
  const auto tr = run_cfg(c);
  EXPECT_LT(tr.rows[0].e_v.norm(), 1e-15);
  EXPECT_NEAR(tr.rows[0].q.x, 0.6, 1e-15);
  EXPECT_LT(tr.rows[0].V, 1e-30);
}

TEST(Sim, Deterministic) {
  ExperimentConfig c = preset("table1-wall-lissajous");
  c.sim.T = 2.0;
  const auto a = run_cfg(c), b = run_cfg(c);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    const auto& ra = a.rows[k];
    const auto& rb = b.rows[k];
    ASSERT_EQ(std::memcmp(&ra.q, &rb.q, sizeof ra.q), 0);
    ASSERT_EQ(std::memcmp(&ra.v, &rb.v, sizeof ra.v), 0);
    ASSERT_EQ(std::memcmp(&ra.tau, &rb.tau, sizeof ra.tau), 0);
    ASSERT_EQ(ra.V, rb.V);
  }
}

TEST(Sim, ZeroOrderHoldMode) {
  ExperimentConfig c = preset("table1-floor-flower");
  c.sim.T = 5.0;
  c.sim.control = ControlMode::zoh;
  const auto tr = run_cfg(c);
  ASSERT_EQ(tr.rows.size(), 5001u);
  for (const auto& r : tr.rows) ASSERT_TRUE(std::isfinite(r.V));
  EXPECT_LT(tr.rows.back().e_v.norm(), 1e-2);
}

TEST(Sim, DivergenceGuardWithoutFeedback) {
  ExperimentConfig c = preset("table1-wall-lissajous");
  c.pi_gains.kp = Vec3::Zero();
  c.pi_gains.ki = Vec3::Zero();
  c.disturbance = UncertaintyModel::gravity_plane(c.robot.m, 9.81, -std::numbers::pi / 2);
  c.sim.divergence_limit = 100.0;
  try {
    const auto tr = run_cfg(c);
    for (const auto& r : tr.rows) ASSERT_TRUE(std::isfinite(r.q.y) && std::isfinite(r.v.v_w));
  } catch (const DivergenceError& e) {
    EXPECT_TRUE(std::isfinite(e.time));
    EXPECT_GT(e.time, 0.0);
    EXPECT_NE(std::string(e.what()).find("divergence guard"), std::string::npos);
  }
}

TEST(Sim, ConfigValidation) {
  SimConfig s;
  s.dt = 0;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = SimConfig{};
  s.T = -1;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = SimConfig{};
  s.record_stride = 0;
  EXPECT_THROW(s.validate(), InvalidInput);
  EXPECT_EQ(SimConfig{}.expected_rows(), 70001u);
}

TEST(Sim, SaturationBitsAreRecorded) {
  ExperimentConfig c = preset("table1-floor-flower");
  c.sim.T = 1.0;
  c.pi_gains.tau_limit = Vec3(1e-6, 1e-6, 1e-6);
  const auto tr = run_cfg(c);
  bool torque = false;
  for (const auto& r : tr.rows) {
    ASSERT_LE(r.sat, kSatMax);
    torque = torque || (r.sat & kSatTorque);
  }
  EXPECT_TRUE(torque);
}
