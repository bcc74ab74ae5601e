#include "fwis/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fwis;

namespace {

// Oracle values from tests/oracles/closed_form_oracle.py.
constexpr double kSigmaJ = 4.664020413736746;
constexpr double kSigmaDJ = 3.3729131637023424;
constexpr double kLM = 3.4945042531972224;
constexpr double kLC1 = 3.5453931594470545;
constexpr double kLC2 = 1.7472521265986112;
constexpr double kVd = 0.28170213053976645;
constexpr double kDv = 0.6634691358024692;
constexpr double kAq = 3.2136685372054172;
constexpr double kAv = 2.2956525197255178;
constexpr double kAcViscous = 0.18690066910293324;
constexpr double kThreshold = 1.538804813067076;
constexpr double kMuLimit = 0.0465273444720129;
constexpr double kBf = 0.0305;

UncertaintyBounds viscous_bounds() {
  UncertaintyBounds u;
  u.d[3] = kBf;
  u.L_f2 = kBf;
  return u;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Bounds, MassAndCoriolisConstants) {
  RobotParams p;
  const auto [a1, a2] = mass_bounds(p);
  EXPECT_DOUBLE_EQ(a1, 0.004);
  EXPECT_NEAR(a2, 4.284847782041243, 1e-13);
  EXPECT_NEAR(coriolis_bound(p), 1.2354938271604938, 1e-14);

  // Heavy steering takes over the upper bound.
  p.I_delta = 1e3;
  EXPECT_DOUBLE_EQ(mass_bounds(p).second, 2e3);
  p = RobotParams{};
  p.m = 0;
  p.I = 0;
  EXPECT_EQ(coriolis_bound(p), 0.0);
}

TEST(Bounds, JacobianGainFormulaAndSamples) {
  const RobotParams p;
  const EnvelopeSpec env;
  EXPECT_NEAR(jacobian_gain(p, env, GainMode::formula), kSigmaJ, 1e-13);
  EXPECT_LT(rel(jacobian_gain(p, env, GainMode::formula), 4.6640), 1e-4);
  EXPECT_NEAR(jacobian_gain(p, env, GainMode::sampled, 1), std::sqrt(2.0), 1e-15);

  const double sampled = jacobian_gain(p, env, GainMode::sampled, 10000, 3);
  EXPECT_LE(sampled, kSigmaJ);
  EXPECT_NEAR(sampled, 4.5544, 5e-3);

  RobotParams flat = p;
  flat.a = 0.0;  // A = 0
  EXPECT_NEAR(jacobian_gain(flat, env, GainMode::formula), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(jacobian_sensitivity(flat), std::sqrt(1.5), 1e-15);
  EXPECT_NEAR(jacobian_sensitivity(p), kSigmaDJ, 1e-13);
}

TEST(Bounds, LipschitzConstants) {
  const auto L = lipschitz_constants({}, {});
  EXPECT_NEAR(L.L_M, kLM, 1e-13);
  EXPECT_NEAR(L.L_C1, kLC1, 1e-13);
  EXPECT_NEAR(L.L_C2, kLC2, 1e-13);
  // Published value is 1.7479; our recomputation agrees to 0.1%.
  EXPECT_LT(rel(L.L_C2, 1.7479), 1e-3);

  EnvelopeSpec slow;
  slow.delta_dot_max = 0.5;
  EXPECT_NEAR(lipschitz_constants({}, slow).L_C1, kLC1 * 0.5 / (std::numbers::pi / 2), 1e-12);
  EXPECT_EQ(lipschitz_constants({}, slow).L_C2, L.L_C2);
}

TEST(Bounds, VelocitySensitivity) {
  EXPECT_NEAR(velocity_sensitivity({}, kBf), kDv, 1e-13);
  EXPECT_LT(rel(velocity_sensitivity({}, kBf), 0.6635), 1e-4);
  EXPECT_EQ(velocity_sensitivity({}, 0.0), 0.0);
}

TEST(Bounds, EnvelopeVelocity) {
  const RobotParams p;
  EnvelopeSpec env;
  EXPECT_NEAR(env.V_d(p), kVd, 1e-13);
  env.V_d_override = 0.5;
  EXPECT_EQ(env.V_d(p), 0.5);
}

TEST(Bounds, ResidualCoefficients) {
  const BoundSet b = compute_bounds({}, {}, viscous_bounds());
  EXPECT_NEAR(b.A_q, kAq, 1e-12);
  EXPECT_NEAR(b.A_v, kAv, 1e-12);
  EXPECT_LT(rel(b.A_v, 2.2964), 5e-4);
  EXPECT_NEAR(b.A_c, kAcViscous, 1e-13);
  EXPECT_NEAR(b.d_tilde, kDv, 1e-13);
  EXPECT_EQ(b.c_tilde, 0.0);

  const auto zero = residual_coeffs(b, 0.0, 0.0);
  EXPECT_EQ(zero.A_q, 0.0);
  EXPECT_EQ(zero.A_v, 0.0);
  EXPECT_EQ(zero.A_c, b.c_tilde);

  // Feeding the published constants back in reproduces the published A_v.
  BoundSet published = b;
  published.L_C2 = 1.7479;
  published.sigma_J = 4.6640;
  EXPECT_LT(rel(residual_coeffs(published, 0.2817, 0.5).A_v, 2.2964), 5e-4);
}

TEST(Bounds, CoriolisSubstitutionVariant) {
  const BoundSet b = compute_bounds({}, {}, viscous_bounds(), {.coriolis_substitution = true});
  EXPECT_TRUE(b.coriolis_substitution);
  EXPECT_NEAR(b.A_v, 1.6232714639458978, 1e-12);
  EXPECT_NEAR(b.A_q, 3.076690695765295, 1e-12);
  EXPECT_LT(b.A_v, compute_bounds({}, {}, viscous_bounds()).A_v);
}

TEST(Bounds, CertificateForShippedGains) {
  const BoundSet b = compute_bounds({}, {}, viscous_bounds());
  const PIGains g;
  const auto c = certify(b, g, 1e-3);
  EXPECT_NEAR(c.threshold, kThreshold, 1e-12);
  EXPECT_LT(std::abs(c.threshold - 1.539), 1e-3);
  EXPECT_TRUE(c.pass);
  EXPECT_TRUE(c.pass_limit);
  EXPECT_NEAR(c.mu_limit, kMuLimit, 1e-12);
  EXPECT_NEAR(c.mu, kMuLimit - 1e-3, 1e-12);
  EXPECT_NEAR(c.l2_gain_bound, 1.0 / c.mu, 1e-9);
  // Torque-domain margin quoted with the gain choice.
  EXPECT_NEAR(g.K_t * (g.lambda_min_kp() - 1.539), 0.0462, 1e-4);
}

TEST(Bounds, CertificateFlipsAtThreshold) {
  const BoundSet b = compute_bounds({}, {}, viscous_bounds());
  const double eps = 1e-3;
  PIGains g;
  const double edge = kThreshold + eps / g.K_t;
  g.kp[0] = edge * (1 + 1e-9);
  EXPECT_TRUE(certify(b, g, eps).pass);
  g.kp[0] = edge * (1 - 1e-9);
  EXPECT_FALSE(certify(b, g, eps).pass);
  EXPECT_TRUE(certify(b, g, eps).pass_limit);
  EXPECT_TRUE(std::isinf(certify(b, g, eps).l2_gain_bound));

  g.kp[0] = 1.0;
  EXPECT_FALSE(certify(b, g, eps).pass);
}

TEST(Bounds, NominalCaseCertifiesAnyPositiveGain) {
  BoundSet b;
  PIGains g;
  g.kp = Vec3(0.01, 0.02, 0.03);
  const auto c = certify(b, g, 1e-4);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.mu, g.K_t * 0.01 - 1e-4, 1e-15);
}

TEST(Bounds, EpsilonMustBePositive) {
  const BoundSet b = compute_bounds({}, {}, viscous_bounds());
  EXPECT_THROW(certify(b, {}, 0.0), InvalidInput);
  EXPECT_THROW(certify(b, {}, -1.0), InvalidInput);
  EXPECT_THROW(certify(b, {}, std::nan("")), InvalidInput);
}

TEST(Bounds, CoefficientsGrowWithTheEnvelope) {
  EnvelopeSpec small, big;
  small.v_w_max = 0.05;
  big.v_w_max = 0.3;
  const BoundSet bs = compute_bounds({}, small, viscous_bounds());
  const BoundSet bb = compute_bounds({}, big, viscous_bounds());
  EXPECT_LT(bs.V_d, bb.V_d);
  EXPECT_LT(bs.A_v, bb.A_v);
  EXPECT_LT(bs.A_q, bb.A_q);
  EXPECT_LT(certify(bs, {}, 1e-3).threshold, certify(bb, {}, 1e-3).threshold);
}
