#include "fwis/kincontrol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fwis {

double PoseRef::travel_angle() const {
  if (x_dot_d == 0.0 && y_dot_d == 0.0) return theta_d;
  return std::atan2(y_dot_d, x_dot_d);
}

void KinGains::validate() const {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!(pos(k_x) && pos(k_y) && pos(k_theta) && pos(k_delta)))
    throw InvalidInput("kin_gains: k_x, k_y, k_theta, k_delta must be positive");
  if (!pos(eps_v)) throw InvalidInput("kin_gains.eps_v must be positive");
  if (!(pos(delta_max) && delta_max <= std::numbers::pi / 2 + 1e-15))
    throw InvalidInput("kin_gains.delta_max must lie in (0, pi/2]");
  if (!pos(delta_dot_max)) throw InvalidInput("kin_gains.delta_dot_max must be positive");
  if (!pos(tau_ff)) throw InvalidInput("kin_gains.tau_ff must be positive");
}

double wrap_angle(double angle) {
  double w = std::remainder(angle, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

double unwrap_near(double reference, double angle) {
  return reference + wrap_angle(angle - reference);
}

double sgn_eps(double v) { return v < 0.0 ? -1.0 : 1.0; }

PoseError pose_error(const ConfigState& q, const PoseRef& ref, bool wrap_heading) {
  const double dx = ref.x_d - q.x, dy = ref.y_d - q.y;
  const double c = std::cos(q.theta), s = std::sin(q.theta);
  PoseError e;
  e.e_x = dx * c + dy * s;
  e.e_y = -dx * s + dy * c;
  e.e_theta = ref.theta_d - q.theta;
  if (wrap_heading) e.e_theta = wrap_angle(e.e_theta);
  return e;
}

TrackingCommand tracking_law(const PoseError& err, const PoseRef& ref, const KinGains& g) {
  return {ref.v_t * std::cos(err.e_theta) + g.k_x * err.e_x,
          ref.omega_d + g.k_theta * err.e_theta + g.k_y * ref.v_t * err.e_y};
}

SteeringSeed steering_seed(const PoseError& err, const PoseRef& ref, const KinGains& g,
                           const RobotParams& p) {
  // Travel direction seen from the body: world travel angle minus the actual
  // heading (theta = theta_d - e_theta). For a heading-aligned reference this
  // is just e_theta; for a fixed-heading reference it is the crab angle.
  const double beta = ref.travel_angle() - ref.theta_d + err.e_theta;
  SteeringSeed s;
  s.a = ref.v_t * std::cos(beta) + g.k_x * err.e_x;
  s.b_mean = ref.v_t * std::sin(beta) + g.k_y * ref.v_t * err.e_y;
  s.b_f = s.b_mean - g.k_theta * p.a * err.e_theta;
  s.b_r = s.b_mean + g.k_theta * p.a * err.e_theta;
  return s;
}

SteeringCommand steering_map(const PoseError& err, const PoseRef& ref, const KinGains& g,
                             const RobotParams& p, double v_w_d, double omega_virt) {
  const SteeringSeed seed = steering_seed(err, ref, g, p);
  const double sigma = sgn_eps(v_w_d);
  // Driving backwards flips the wheel direction by pi, keeping |delta| <= pi/2.
  const double df0 = std::atan2(sigma * seed.b_f, sigma * seed.a);
  const double dr0 = std::atan2(sigma * seed.b_r, sigma * seed.a);

  const double A = p.A();
  const double speed = sigma * std::max(std::abs(v_w_d), g.eps_v);
  SteeringCommand out;
  out.s_demand = omega_virt / (A * speed);
  const double d_req = out.s_demand - (std::sin(df0) - std::sin(dr0));
  double sf = std::sin(df0) + 0.5 * d_req;
  double sr = std::sin(dr0) - 0.5 * d_req;

  unsigned clamps = 0;
  auto clamp_unit = [&clamps](double s, unsigned bit) {
    if (s > 1.0 || s < -1.0) clamps |= bit;
    return std::clamp(s, -1.0, 1.0);
  };
  sf = clamp_unit(sf, kClampFront);
  sr = clamp_unit(sr, kClampRear);
  double df = std::atan2(sf, std::sqrt(1.0 - sf * sf));
  double dr = std::atan2(sr, std::sqrt(1.0 - sr * sr));
  auto clamp_angle = [&](double d, unsigned bit) {
    if (std::abs(d) > g.delta_max) {
      clamps |= bit;
      return std::clamp(d, -g.delta_max, g.delta_max);
    }
    return d;
  };
  df = clamp_angle(df, kClampFront);
  dr = clamp_angle(dr, kClampRear);
  const bool sat = clamps != 0;

  out.delta_f_d = df;
  out.delta_r_d = dr;
  out.saturated = sat;
  out.clamps = clamps;
  out.s_achieved = std::sin(df) - std::sin(dr);
  // On saturation the yaw demand shrinks to what the clamped angles deliver,
  // which equals omega_virt * s_achieved / s_demand.
  out.omega_virt = sat ? A * speed * out.s_achieved : omega_virt;
  return out;
}

std::pair<double, double> steering_rate_law(double delta_f, double delta_r, double delta_f_d,
                                            double delta_r_d, const KinGains& g) {
  auto law = [&](double d, double dd) {
    return std::clamp(-g.k_delta * (d - dd), -g.delta_dot_max, g.delta_dot_max);
  };
  return {law(delta_f, delta_f_d), law(delta_r, delta_r_d)};
}

KinematicCommand kinematic_command(const ConfigState& q, const PoseRef& ref, const KinGains& g,
                                   const RobotParams& p) {
  KinematicCommand cmd;
  cmd.err = pose_error(q, ref);
  const TrackingCommand tl = tracking_law(cmd.err, ref, g);
  const SteeringSeed seed = steering_seed(cmd.err, ref, g, p);
  cmd.v_w_d = sgn_eps(seed.a) * std::hypot(seed.a, seed.b_mean);
  const SteeringCommand sm = steering_map(cmd.err, ref, g, p, cmd.v_w_d, tl.omega_virt);
  cmd.delta_f_d = sm.delta_f_d;
  cmd.delta_r_d = sm.delta_r_d;
  cmd.omega_virt = sm.omega_virt;
  std::tie(cmd.omega_f_d, cmd.omega_r_d) =
      steering_rate_law(q.delta_f, q.delta_r, sm.delta_f_d, sm.delta_r_d, g);
  cmd.saturated = sm.saturated;
  cmd.clamps = sm.clamps;
  if (std::abs(cmd.omega_f_d) >= g.delta_dot_max) cmd.clamps |= kClampRateFront;
  if (std::abs(cmd.omega_r_d) >= g.delta_dot_max) cmd.clamps |= kClampRateRear;
  return cmd;
}

ReferenceState reference_step(const ConfigState& q, const PoseRef& ref, const KinGains& g,
                              const RobotParams& p, const ReferenceState& prev, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("reference_step: dt must be positive");
  const KinematicCommand cmd = kinematic_command(q, ref, g, p);
  ReferenceState next;
  next.v_w_d = cmd.v_w_d;
  next.omega_f_d = cmd.omega_f_d;
  next.omega_r_d = cmd.omega_r_d;
  next.omega_virt = cmd.omega_virt;
  next.saturated = cmd.saturated;
  next.clamps = cmd.clamps;
  next.delta_f_d = prev.primed ? unwrap_near(prev.delta_f_d, cmd.delta_f_d) : cmd.delta_f_d;
  next.delta_r_d = prev.primed ? unwrap_near(prev.delta_r_d, cmd.delta_r_d) : cmd.delta_r_d;
  if (prev.primed) {
    const Vec3 raw = (next.v_d().vec() - prev.v_d().vec()) / dt;
    const double alpha = dt / (g.tau_ff + dt);
    next.v_dot_d = prev.v_dot_d + alpha * (raw - prev.v_dot_d);
  }
  next.primed = true;
  return next;
}

}  // namespace fwis
