#pragma once

#include "fwis/dyncontrol.hpp"
#include "fwis/types.hpp"
#include "fwis/uncertainty.hpp"

#include <cstdint>
#include <utility>

namespace fwis {

enum class GainMode { formula, sampled };

struct LipschitzConstants {
  double L_M = 0, L_C1 = 0, L_C2 = 0;
};

struct ResidualCoeffs {
  double A_q = 0, A_v = 0, A_c = 0;
};

/// All structural constants feeding the gain condition.
struct BoundSet {
  double a1 = 0, a2 = 0;
  double b_c = 0;
  double sigma_J = 0, sigma_dJ = 0;
  double L_M = 0, L_C1 = 0, L_C2 = 0;
  double c_tilde = 0, d_tilde = 0;
  double d_v = 0;
  double A_q = 0, A_v = 0, A_c = 0;
  double V_d = 0, A_d = 0;  // envelope values the coefficients were built from
  bool coriolis_substitution = false;
};

struct BoundOptions {
  // Replace L_C2 by b_c in A_q and A_v (less conservative, see docs).
  bool coriolis_substitution = false;
};

std::pair<double, double> mass_bounds(const RobotParams& p);
double coriolis_bound(const RobotParams& p);
double jacobian_gain(const RobotParams& p, const EnvelopeSpec& env, GainMode mode,
                     std::size_t samples = 10000, std::uint64_t seed = 1);
double jacobian_sensitivity(const RobotParams& p);
LipschitzConstants lipschitz_constants(const RobotParams& p, const EnvelopeSpec& env);
double velocity_sensitivity(const RobotParams& p, double L_f2);

// Needs L_M, L_C1, L_C2, sigma_J, sigma_dJ, c_tilde, d_tilde (and b_c when
// the substitution is requested) already filled in.
ResidualCoeffs residual_coeffs(const BoundSet& partial, double V_d, double A_d,
                               bool coriolis_substitution = false);
ResidualCoeffs residual_coeffs(const BoundSet& partial, const EnvelopeSpec& env, const RobotParams& p,
                               bool coriolis_substitution = false);

BoundSet compute_bounds(const RobotParams& p, const EnvelopeSpec& env, const UncertaintyBounds& unc,
                        const BoundOptions& opts = {});

struct GainCertificate {
  double lambda_min_Kp = 0;  // current domain
  double K_t = 0;
  double epsilon = 0;
  double mu = 0;        // torque domain, at the requested epsilon
  double mu_limit = 0;  // epsilon -> 0+
  double threshold = 0; // (d_v + A_v) / K_t, current domain
  bool pass = false;
  bool pass_limit = false;
  double l2_gain_bound = 0;  // 1/mu, +inf when not certified
};

GainCertificate certify(const BoundSet& bounds, const PIGains& gains, double epsilon);

}  // namespace fwis
