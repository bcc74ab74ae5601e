#include "fwis/bounds.hpp"

#include "fwis/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace fwis {

std::pair<double, double> mass_bounds(const RobotParams& p) {
  const double wheel = 4.0 * p.I_phi / (p.r * p.r);
  const double A = p.A();
  return {std::min(wheel, 2.0 * p.I_delta), std::max(wheel + p.m + 4.0 * p.I * A * A, 2.0 * p.I_delta)};
}

double coriolis_bound(const RobotParams& p) {
  const double A = p.A();
  return 2.0 * p.I * A * A + p.m / 4.0;
}

double jacobian_gain(const RobotParams& p, const EnvelopeSpec& env, GainMode mode,
                     std::size_t samples, std::uint64_t seed) {
  const double A = p.A();
  if (mode == GainMode::formula) return std::sqrt(2.0 + 4.0 * A * A);

  // In the metric W = diag(1,1,1,r^2,1,1) J^T W J is diag(S, 1, 1) with
  // S = (1 + cos(df - dr))/2 + A^2 (sin df - sin dr)^2 + 1, independent of theta.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(env.delta_lo, env.delta_hi);
  double best = 1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double df = samples == 1 ? 0.0 : ud(rng);
    const double dr = samples == 1 ? 0.0 : ud(rng);
    const ConfigState q{0, 0, 0, 0, df, dr};
    Mat6 W = Mat6::Identity();
    W(3, 3) = p.r * p.r;
    const Mat63 J = jacobian(q, p);
    const Mat3 G = J.transpose() * W * J;
    best = std::max(best, Eigen::SelfAdjointEigenSolver<Mat3>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff());
  }
  return std::sqrt(best);
}

double jacobian_sensitivity(const RobotParams& p) {
  const double A = p.A();
  return std::sqrt(1.5 + 2.0 * A * A);
}

LipschitzConstants lipschitz_constants(const RobotParams& p, const EnvelopeSpec& env) {
  const double A = p.A();
  const double IA2 = p.I * A * A;
  return {std::numbers::sqrt2 * (p.m / 2.0 + 4.0 * IA2),
          std::numbers::sqrt2 * (p.m / 4.0 + 4.0 * IA2) * env.delta_dot_max,
          std::numbers::sqrt2 * (p.m / 4.0 + 2.0 * IA2)};
}

double velocity_sensitivity(const RobotParams& p, double L_f2) {
  const double s = jacobian_gain(p, EnvelopeSpec{}, GainMode::formula);
  return s * s * L_f2;
}

ResidualCoeffs residual_coeffs(const BoundSet& b, double V_d, double A_d, bool coriolis_substitution) {
  const double lc2 = coriolis_substitution ? b.b_c : b.L_C2;
  return {b.L_M * A_d + b.L_C1 * V_d + lc2 * b.sigma_dJ * V_d * V_d, lc2 * b.sigma_J * V_d,
          b.c_tilde + b.d_tilde * V_d};
}

ResidualCoeffs residual_coeffs(const BoundSet& b, const EnvelopeSpec& env, const RobotParams& p,
                               bool coriolis_substitution) {
  return residual_coeffs(b, env.V_d(p), env.A_d, coriolis_substitution);
}

BoundSet compute_bounds(const RobotParams& p, const EnvelopeSpec& env, const UncertaintyBounds& unc,
                        const BoundOptions& opts) {
  BoundSet b;
  std::tie(b.a1, b.a2) = mass_bounds(p);
  b.b_c = coriolis_bound(p);
  b.sigma_J = jacobian_gain(p, env, GainMode::formula);
  b.sigma_dJ = jacobian_sensitivity(p);
  const auto L = lipschitz_constants(p, env);
  b.L_M = L.L_M;
  b.L_C1 = L.L_C1;
  b.L_C2 = L.L_C2;
  b.c_tilde = b.sigma_J * unc.c.norm();
  b.d_tilde = b.sigma_J * b.sigma_J * unc.d.norm();
  b.d_v = velocity_sensitivity(p, unc.L_f2);
  b.V_d = env.V_d(p);
  b.A_d = env.A_d;
  b.coriolis_substitution = opts.coriolis_substitution;
  const auto rc = residual_coeffs(b, b.V_d, b.A_d, opts.coriolis_substitution);
  b.A_q = rc.A_q;
  b.A_v = rc.A_v;
  b.A_c = rc.A_c;
  return b;
}

GainCertificate certify(const BoundSet& b, const PIGains& gains, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("certify: epsilon must be positive");
  GainCertificate c;
  c.lambda_min_Kp = gains.lambda_min_kp();
  c.K_t = gains.K_t;
  c.epsilon = epsilon;
  const double lam = gains.K_t * c.lambda_min_Kp;
  c.mu_limit = lam - b.d_v - b.A_v;
  c.mu = c.mu_limit - epsilon;
  c.threshold = (b.d_v + b.A_v) / gains.K_t;
  c.pass = c.mu > 0.0;
  c.pass_limit = c.mu_limit > 0.0;
  c.l2_gain_bound = c.pass ? 1.0 / c.mu : std::numeric_limits<double>::infinity();
  return c;
}

}  // namespace fwis
