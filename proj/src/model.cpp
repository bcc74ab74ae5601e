#include "fwis/model.hpp"

#include <cmath>

namespace fwis {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::vector<std::string> RobotParams::validate(double i_rel_tol) const {
  const std::pair<const char*, double> fields[] = {
      {"r", r},         {"a", a},           {"b", b},
      {"m", m},         {"m_w", m_w},       {"I_theta", I_theta},
      {"I_phi", I_phi}, {"I_delta", I_delta}, {"I", I}};
  for (const auto& [name, value] : fields) {
    if (!positive_finite(value))
      throw InvalidInput(std::string("robot.") + name + " must be positive and finite");
  }
  std::vector<std::string> warnings;
  const double rel = std::abs(I - recomputed_I()) / recomputed_I();
  if (rel > i_rel_tol) {
    warnings.push_back("robot.I = " + std::to_string(I) + " differs from I_theta + 4 m_w (a^2+b^2) = " +
                       std::to_string(recomputed_I()) + " by " + std::to_string(rel) + " relative");
  }
  return warnings;
}

double EnvelopeSpec::V_d(const RobotParams& p) const {
  if (V_d_override > 0.0) return V_d_override;
  const double w = norm == VelocityNorm::weighted ? p.a : 1.0;
  return std::sqrt(v_w_max * v_w_max + 2.0 * w * w * delta_dot_max * delta_dot_max);
}

void EnvelopeSpec::validate() const {
  if (!(std::isfinite(delta_lo) && std::isfinite(delta_hi) && delta_lo < delta_hi))
    throw InvalidInput("envelope.delta_range must be a finite interval with lo < hi");
  if (!positive_finite(delta_dot_max)) throw InvalidInput("envelope.delta_dot_max must be positive");
  if (!positive_finite(v_w_max)) throw InvalidInput("envelope.v_w_max must be positive");
  if (!(std::isfinite(A_d) && A_d >= 0.0)) throw InvalidInput("envelope.A_d must be non-negative");
  if (!std::isfinite(V_d_override)) throw InvalidInput("envelope.V_d must be finite");
}

Mat63 jacobian(const ConfigState& q, const RobotParams& p) {
  const double A = p.A();
  Mat63 J = Mat63::Zero();
  J(0, 0) = 0.5 * (std::cos(q.delta_f + q.theta) + std::cos(q.delta_r + q.theta));
  J(1, 0) = 0.5 * (std::sin(q.delta_f + q.theta) + std::sin(q.delta_r + q.theta));
  J(2, 0) = A * (std::sin(q.delta_f) - std::sin(q.delta_r));
  J(3, 0) = 1.0 / p.r;
  J(4, 1) = 1.0;
  J(5, 2) = 1.0;
  return J;
}

Mat36 constraint_matrix(const ConfigState& q, const RobotParams& p) {
  // a1..a3 here are the constraint entries, unrelated to the inertia bounds.
  const double a1 = 0.5 * (std::sin(q.delta_f + q.theta) + std::sin(q.delta_r + q.theta));
  const double a2 = 0.5 * (std::cos(q.delta_f + q.theta) + std::cos(q.delta_r + q.theta));
  const double a3 = p.A() * (std::sin(q.delta_f) - std::sin(q.delta_r));
  Mat36 Aq = Mat36::Zero();
  Aq(0, 0) = a1;
  Aq(0, 1) = -a2;
  Aq(1, 0) = a3;
  Aq(1, 2) = -a2;
  Aq(2, 1) = a3;
  Aq(2, 2) = -a1;
  return Aq;
}

Mat6 mass_matrix_full(const RobotParams& p) {
  Vec6 d;
  d << p.m, p.m, p.I, 4.0 * p.I_phi, 2.0 * p.I_delta, 2.0 * p.I_delta;
  return d.asDiagonal();
}

double m_tilde_11(double delta_f, double delta_r, const RobotParams& p) {
  const double A = p.A();
  const double ds = std::sin(delta_f) - std::sin(delta_r);
  return 4.0 * p.I_phi / (p.r * p.r) + 0.5 * p.m * (1.0 + std::cos(delta_f - delta_r)) +
         p.I * A * A * ds * ds;
}

double c_tilde_11(double delta_f, double delta_r, double delta_dot_f, double delta_dot_r,
                  const RobotParams& p) {
  const double A = p.A();
  const double ds = std::sin(delta_f) - std::sin(delta_r);
  const double dds = std::cos(delta_f) * delta_dot_f - std::cos(delta_r) * delta_dot_r;
  return p.I * A * A * ds * dds - 0.25 * p.m * std::sin(delta_f - delta_r) * (delta_dot_f - delta_dot_r);
}

double b_tilde_11(double delta_f, double delta_r, const RobotParams& p) {
  const double ds = std::sin(delta_f) - std::sin(delta_r);
  const double geo = p.a * p.a / (p.a * p.a + p.b * p.b);
  return (2.0 * (1.0 + std::cos(delta_f - delta_r)) + geo * ds * ds + 4.0) / p.r;
}

Mat3 m_tilde(const ConfigState& q, const RobotParams& p) {
  return Vec3(m_tilde_11(q.delta_f, q.delta_r, p), 2.0 * p.I_delta, 2.0 * p.I_delta).asDiagonal();
}

Mat3 c_tilde(const ConfigState& q, double delta_dot_f, double delta_dot_r, const RobotParams& p) {
  Mat3 C = Mat3::Zero();
  C(0, 0) = c_tilde_11(q.delta_f, q.delta_r, delta_dot_f, delta_dot_r, p);
  return C;
}

Mat3 b_tilde(const ConfigState& q, const RobotParams& p) {
  return Vec3(b_tilde_11(q.delta_f, q.delta_r, p), 2.0, 2.0).asDiagonal();
}

Vec3 f_tilde_project(const ConfigState& q, const Vec6& f_full, const RobotParams& p) {
  return jacobian(q, p).transpose() * f_full;
}

}  // namespace fwis
