#include "fwis/dyncontrol.hpp"

#include "fwis/model.hpp"

#include <cmath>

namespace fwis {

void PIGains::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(std::isfinite(kp[i]) && kp[i] > 0.0)) throw InvalidInput("pi_gains.kp entries must be positive");
    if (!(std::isfinite(ki[i]) && ki[i] > 0.0)) throw InvalidInput("pi_gains.ki entries must be positive");
    if (!(std::isfinite(eta_limit[i]) && eta_limit[i] > 0.0))
      throw InvalidInput("pi_gains.eta_limit entries must be positive");
    if (tau_limit && !((*tau_limit)[i] > 0.0))
      throw InvalidInput("pi_gains.tau_limit entries must be positive");
  }
  if (!(std::isfinite(K_t) && K_t > 0.0)) throw InvalidInput("pi_gains.K_t must be positive");
}

Vec3 feedforward(const ConfigState& q_d, const Vec3& v_d, const Vec3& v_dot_d, const RobotParams& p) {
  // J columns 2 and 3 are unit vectors, so the steering rates of
  // q_dot_d = J(q_d) v_d are just the reference steering rates.
  return m_tilde(q_d, p) * v_dot_d + c_tilde(q_d, v_d[1], v_d[2], p) * v_d;
}

Vec3 control_torque(const ConfigState& q, const Vec3& e_v, const Vec3& eta, const Vec3& u_d,
                    const PIGains& gains, const RobotParams& p, bool* saturated) {
  const Vec3 rhs = -gains.kp_torque().cwiseProduct(e_v) - gains.ki_torque().cwiseProduct(eta) + u_d;
  Vec3 tau(rhs[0] / b_tilde_11(q.delta_f, q.delta_r, p), rhs[1] / 2.0, rhs[2] / 2.0);
  bool sat = false;
  if (gains.tau_limit) {
    for (int i = 0; i < 3; ++i) {
      const double lim = (*gains.tau_limit)[i];
      if (std::abs(tau[i]) > lim) {
        tau[i] = std::copysign(lim, tau[i]);
        sat = true;
      }
    }
  }
  if (saturated) *saturated = sat;
  return tau;
}

Vec3 integral_rate(const Vec3& eta, const Vec3& e_v, const Vec3& limit) {
  Vec3 rate = e_v;
  for (int i = 0; i < 3; ++i) {
    if ((eta[i] >= limit[i] && e_v[i] > 0.0) || (eta[i] <= -limit[i] && e_v[i] < 0.0)) rate[i] = 0.0;
  }
  return rate;
}

ControlOutput control_step(const ConfigState& q, const BodyVelocity& v, const ReferenceState& ref,
                           const ConfigState& q_d, const PIGains& gains,
                           const ControllerState& state, double dt, const RobotParams& p) {
  if (!(dt > 0.0)) throw InvalidInput("control_step: dt must be positive");
  ControlOutput out;
  const Vec3 v_d = ref.v_d().vec();
  out.e_v = v.vec() - v_d;
  out.state = state;
  if (state.primed) {
    const Vec3 eta = state.eta + 0.5 * dt * (state.last_e_v + out.e_v);
    out.state.eta = eta.cwiseMax(-gains.eta_limit).cwiseMin(gains.eta_limit);
  }
  out.state.last_e_v = out.e_v;
  out.state.primed = true;

  const Vec3 u_d = feedforward(q_d, v_d, ref.v_dot_d, p);
  out.tau = Wrench::from(control_torque(q, out.e_v, out.state.eta, u_d, gains, p, &out.saturated));
  return out;
}

ControllerState reset(const ControllerState&) { return ControllerState{}; }

}  // namespace fwis
