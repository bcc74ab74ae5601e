#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace fwis {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

// Raised for invalid user-facing inputs (parameters, configs, envelopes).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Physical constants of the robot. `I` is stored as given; `A` is always
/// derived from the geometry.
struct RobotParams {
  double r = 0.0254;        // wheel radius (m)
  double a = 0.1125;        // centroid-to-axle distance (m)
  double b = 0.1125;        // half track width (m)
  double m = 3.50;          // total mass incl. wheels (kg)
  double m_w = 0.03203;     // single wheel mass (kg)
  double I_theta = 0.03333; // body yaw inertia (kg m^2)
  double I_phi = 1.03e-5;   // wheel spin inertia (kg m^2)
  double I_delta = 0.002;   // steering inertia (kg m^2)
  double I = 0.0365;        // total yaw inertia (kg m^2)


  double A() const { return a / (2.0 * a * a + 2.0 * b * b); }
  double recomputed_I() const { return I_theta + 4.0 * m_w * (a * a + b * b); }

  // Throws InvalidInput on non-positive or non-finite fields. Returns
  // soft warnings (e.g. stored I drifting from its definition).
  std::vector<std::string> validate(double i_rel_tol = 1e-3) const;
};

struct ConfigState {
  double x = 0, y = 0, theta = 0, phi = 0, delta_f = 0, delta_r = 0;

  Vec6 vec() const {
    Vec6 q;
    q << x, y, theta, phi, delta_f, delta_r;
    return q;
  }
  static ConfigState from(const Vec6& q) { return {q[0], q[1], q[2], q[3], q[4], q[5]}; }
};

struct BodyVelocity {
  double v_w = 0, omega_f = 0, omega_r = 0;

  Vec3 vec() const { return {v_w, omega_f, omega_r}; }
  static BodyVelocity from(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

struct Wrench {
  double tau_w = 0, tau_f = 0, tau_r = 0;

  Vec3 vec() const { return {tau_w, tau_f, tau_r}; }
  static Wrench from(const Vec3& t) { return {t[0], t[1], t[2]}; }
};

enum class VelocityNorm { weighted, euclidean };

/// Operating envelope used by every bound. V_d and A_d are optional overrides;
/// when absent V_d follows from v_w_max and delta_dot_max.
struct EnvelopeSpec {
  double delta_lo = -1.5707963267948966;
  double delta_hi = 1.5707963267948966;
  double delta_dot_max = 1.5707963267948966;
  double v_w_max = 0.13;
  double A_d = 0.5;
  double V_d_override = 0.0;  // <= 0 means auto-derive
  VelocityNorm norm = VelocityNorm::weighted;

  double V_d(const RobotParams& p) const;
  void validate() const;
};

}  // namespace fwis
