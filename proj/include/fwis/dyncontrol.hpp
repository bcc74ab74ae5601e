#pragma once

#include "fwis/kincontrol.hpp"
#include "fwis/types.hpp"

#include <optional>

namespace fwis {

/// Inner-loop gains in current domain (A s/m, A/m); torque-domain values
/// are obtained by multiplying with the motor torque constant K_t.
struct PIGains {
  Vec3 kp{1.563, 2.344, 2.344};
  Vec3 ki{0.061, 0.092, 0.092};
  double K_t = 1.923;
  Vec3 eta_limit{10.0, 10.0, 10.0};
  std::optional<Vec3> tau_limit;  // per-channel torque clamp, off by default

  Vec3 kp_torque() const { return K_t * kp; }
  Vec3 ki_torque() const { return K_t * ki; }
  double lambda_min_kp() const { return kp.minCoeff(); }

  void validate() const;
};

struct ControllerState {
  Vec3 eta = Vec3::Zero();
  Vec3 last_e_v = Vec3::Zero();
  bool primed = false;
};

struct ControlOutput {
  Wrench tau;
  ControllerState state;
  Vec3 e_v = Vec3::Zero();
  bool saturated = false;
};

// u_d = M~(q_d) v_dot_d + C~(q_d, J(q_d) v_d) v_d.
Vec3 feedforward(const ConfigState& q_d, const Vec3& v_d, const Vec3& v_dot_d, const RobotParams& p);

// tau = B~(q)^-1 (-K_P e_v - K_I eta + u_d), torque-domain gains, optional clamp.
Vec3 control_torque(const ConfigState& q, const Vec3& e_v, const Vec3& eta, const Vec3& u_d,
                    const PIGains& gains, const RobotParams& p, bool* saturated = nullptr);

// Integral rate with conditional anti-windup: a clamped channel stops
// integrating in the direction that would push it further out.
Vec3 integral_rate(const Vec3& eta, const Vec3& e_v, const Vec3& limit);

ControlOutput control_step(const ConfigState& q, const BodyVelocity& v, const ReferenceState& ref,
                           const ConfigState& q_d, const PIGains& gains,
                           const ControllerState& state, double dt, const RobotParams& p);

ControllerState reset(const ControllerState& state);

}  // namespace fwis
