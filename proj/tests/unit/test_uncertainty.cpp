#include "fwis/sim.hpp"
#include "fwis/uncertainty.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fwis;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBf = 0.0305;
constexpr double kMg = 3.5 * 9.81;

Vec6 qdot_phi(double phi_dot) {
  Vec6 qd = Vec6::Zero();
  qd[3] = phi_dot;
  return qd;
}

}  // namespace

TEST(Uncertainty, NoneIsZero) {
  const auto m = UncertaintyModel::none();
  Vec6 qd;
  qd << 1, -2, 3, 40, 5, -6;
  EXPECT_EQ(eval_f(m, {1, 2, 3, 4, 0.5, -0.5}, qd, 7.0), Vec6::Zero());
  EXPECT_EQ(m.auto_bounds().c, Vec6::Zero());
  EXPECT_EQ(m.auto_bounds().L_f2, 0.0);
}

TEST(Uncertainty, ViscousActsOnWheelSpin) {
  const auto m = UncertaintyModel::viscous(kBf);
  const Vec6 f = eval_f(m, {}, qdot_phi(1.0), 0.0);
  EXPECT_DOUBLE_EQ(f[3], 0.0305);
  Vec6 rest = f;
  rest[3] = 0;
  EXPECT_EQ(rest, Vec6::Zero());

  Vec6 qd = qdot_phi(2.0);
  qd[4] = 1.0;
  EXPECT_EQ(eval_f(m, {}, qd, 0)[4], 0.0);
  EXPECT_DOUBLE_EQ(eval_f(UncertaintyModel::viscous(kBf, true), {}, qd, 0)[4], kBf);
}

TEST(Uncertainty, GravityIsConstantAndOpposesTheFall) {
  // f enters with a minus sign, so a pull towards -y shows up as f_y = +m g.
  const auto m = UncertaintyModel::gravity_plane(3.5, 9.81, -kPi / 2);
  const Vec6 f1 = eval_f(m, {}, Vec6::Zero(), 0.0);
  const Vec6 f2 = eval_f(m, {3, -1, 2, 9, 0.4, 0.1}, qdot_phi(50), 12.0);
  EXPECT_NEAR(f1[1], kMg, 1e-12);
  EXPECT_NEAR(f1[0], 0.0, 1e-12);
  EXPECT_EQ(f1, f2);

  // Facing +y with the wheels straight, an idle robot must accelerate downhill.
  const RobotParams p;
  const auto rates = dynamics_rhs({0, 0, kPi / 2, 0, 0, 0}, {}, {}, m, p, 0.0);
  EXPECT_LT(rates.v_dot[0], 0.0);
}

TEST(Uncertainty, MemorylessEvaluation) {
  const auto m = UncertaintyModel::composite(
      {UncertaintyModel::viscous(kBf, true), UncertaintyModel::gravity_plane(3.5, 9.81, 0.3)});
  const ConfigState q{0.2, 0.1, 1.0, 3.0, 0.3, -0.2};
  Vec6 qd;
  qd << 0.1, 0.2, 0.3, 4.0, 0.5, 0.6;
  const Vec6 first = eval_f(m, q, qd, 1.0);
  for (int i = 0; i < 5; ++i) eval_f(m, {9, 9, 9, 9, 1, 1}, 10 * qd, 5.0 + i);
  EXPECT_EQ(eval_f(m, q, qd, 1.0), first);
}

TEST(Uncertainty, CompositeIsTheSumOfItsParts) {
  const auto a = UncertaintyModel::viscous(kBf);
  Vec6 bias;
  bias << 0.5, -1.0, 0.1, 0.0, 0.0, 0.02;
  const auto b = UncertaintyModel::constant_bias(bias);
  const auto c = UncertaintyModel::composite({a, b});
  const Vec6 qd = qdot_phi(-3.0);
  EXPECT_EQ(eval_f(c, {}, qd, 0), eval_f(a, {}, qd, 0) + eval_f(b, {}, qd, 0));

  const auto bc = c.auto_bounds();
  EXPECT_EQ(bc.c, a.bounds().c + b.bounds().c);
  EXPECT_EQ(bc.d, a.bounds().d + b.bounds().d);
  EXPECT_EQ(bc.L_f2, kBf);
}

TEST(Uncertainty, ViscousLipschitzConstantIsTheCoefficient) {
  EXPECT_EQ(UncertaintyModel::viscous(kBf).auto_bounds().L_f2, kBf);
  EXPECT_EQ(UncertaintyModel::viscous(kBf).auto_bounds().d[3], kBf);
}

TEST(Uncertainty, DeclaredBoundsOverrideAutoBounds) {
  auto m = UncertaintyModel::none();
  Vec6 d = Vec6::Zero();
  d[3] = kBf;
  m.declared_d = d;
  m.declared_L_f2 = kBf;
  EXPECT_EQ(m.bounds().d[3], kBf);
  EXPECT_EQ(m.bounds().L_f2, kBf);
  EXPECT_EQ(m.auto_bounds().d[3], 0.0);
}

TEST(Uncertainty, EqualityCaseHasZeroViolation) {
  auto m = UncertaintyModel::viscous(kBf);
  Vec6 d = Vec6::Zero();
  d[3] = kBf;
  m.declared_c = Vec6::Zero();
  m.declared_d = d;
  const auto rep = verify_assumption_bounds(m, {}, {}, 2000);
  EXPECT_TRUE(rep.pass) << rep.diagnostic;
  EXPECT_EQ(rep.max_component_violation, 0.0);
  EXPECT_TRUE(rep.lipschitz_checked);
  EXPECT_LE(rep.max_lipschitz_quotient, kBf * (1 + 1e-12));
}

TEST(Uncertainty, GravityCoveredByExactBound) {
  auto m = UncertaintyModel::gravity_plane(3.5, 9.81, -kPi / 2);
  Vec6 c = Vec6::Zero();
  c[1] = kMg;
  m.declared_c = c;
  m.declared_d = Vec6::Zero();
  const auto rep = verify_assumption_bounds(m, {}, {}, 1000);
  EXPECT_TRUE(rep.pass) << rep.diagnostic;
}

TEST(Uncertainty, UnderDeclaredGravityFails) {
  auto m = UncertaintyModel::gravity_plane(3.5, 9.81, -kPi / 2);
  Vec6 c = Vec6::Zero();
  c[1] = kMg / 2;
  m.declared_c = c;
  const auto rep = verify_assumption_bounds(m, {}, {}, 1000);
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.worst_component, 1);
  EXPECT_NEAR(rep.max_component_violation, kMg / 2, 1e-12);
  EXPECT_NE(rep.diagnostic.find("worst component 1"), std::string::npos);
}

TEST(Uncertainty, AutoBoundsCoverEveryBuiltInModel) {
  Vec6 bias;
  bias << 0.3, -0.7, 0.05, 0.001, -0.01, 0.01;
  Vec6 push = Vec6::Zero();
  push[0] = 2.0;
  const std::vector<UncertaintyModel> models = {
      UncertaintyModel::none(),
      UncertaintyModel::viscous(kBf),
      UncertaintyModel::viscous(kBf, true),
      UncertaintyModel::constant_bias(bias),
      UncertaintyModel::gravity_plane(3.5, 9.81, 0.7),
      UncertaintyModel::thruster_pulse({{1.0, 2.0, push}, {1.5, 3.0, push}}),
      UncertaintyModel::composite({UncertaintyModel::viscous(kBf), UncertaintyModel::gravity_plane(3.5, 9.81, -kPi / 2)}),
  };
  for (const auto& m : models) {
    const auto rep = verify_assumption_bounds(m, {}, {}, 3000, 7);
    EXPECT_TRUE(rep.pass) << to_string(m.kind) << ": " << rep.diagnostic;
  }
}

TEST(Uncertainty, PulsesAreTimeDependentAndSkipLipschitz) {
  Vec6 push = Vec6::Zero();
  push[1] = -5.0;
  const auto pulse = UncertaintyModel::thruster_pulse({{10.0, 10.5, push}});
  EXPECT_TRUE(pulse.time_dependent());
  EXPECT_TRUE(UncertaintyModel::composite({UncertaintyModel::none(), pulse}).time_dependent());
  EXPECT_FALSE(UncertaintyModel::viscous(kBf).time_dependent());

  EXPECT_EQ(eval_f(pulse, {}, Vec6::Zero(), 9.99)[1], 0.0);
  EXPECT_EQ(eval_f(pulse, {}, Vec6::Zero(), 10.0)[1], -5.0);
  EXPECT_EQ(eval_f(pulse, {}, Vec6::Zero(), 10.5)[1], 0.0);

  const auto rep = verify_assumption_bounds(pulse, {}, {}, 100);
  EXPECT_FALSE(rep.lipschitz_checked);
  EXPECT_TRUE(rep.pass);
}

TEST(Uncertainty, KindNamesRoundTrip) {
  for (auto k : {DisturbanceKind::none, DisturbanceKind::viscous, DisturbanceKind::constant_bias,
                 DisturbanceKind::gravity_plane, DisturbanceKind::thruster_pulse, DisturbanceKind::composite})
    EXPECT_EQ(disturbance_kind_from_string(to_string(k)), k);
  EXPECT_THROW(disturbance_kind_from_string("wind"), InvalidInput);
  EXPECT_THROW(verify_assumption_bounds(UncertaintyModel::none(), {}, {}, 0), InvalidInput);
}
