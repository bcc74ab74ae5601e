#pragma once

#include "fwis/types.hpp"

namespace fwis {

struct PoseRef {
  double x_d = 0, y_d = 0, theta_d = 0;
  double x_dot_d = 0, y_dot_d = 0;
  double v_t = 0;      // path speed
  double omega_d = 0;  // heading rate

  // World-frame direction of travel; theta_d when the reference is at rest.
  double travel_angle() const;
};

struct KinGains {
  double k_x = 5, k_y = 5, k_theta = 5, k_delta = 5;
  double eps_v = 0.01;
  double delta_max = 1.5707963267948966;
  double delta_dot_max = 1.5707963267948966;
  double tau_ff = 0.05;  // command filter time constant for v_dot_d

  void validate() const;
};

struct PoseError {
  double e_x = 0, e_y = 0, e_theta = 0;
};

struct TrackingCommand {
  double v_w_d = 0, omega_virt = 0;
};

// Seed of the steering map: desired body-frame velocity split per axle.
struct SteeringSeed {
  double a = 0;       // longitudinal component, shared by both axles
  double b_mean = 0;  // lateral component without the yaw correction
  double b_f = 0, b_r = 0;
};

// Which clamps of the kinematic loop are active. The values double as bits of
// the trace "sat" column.
inline constexpr unsigned kClampFront = 1, kClampRear = 8, kClampRateFront = 16, kClampRateRear = 32;

struct SteeringCommand {
  double delta_f_d = 0, delta_r_d = 0;
  bool saturated = false;
  unsigned clamps = 0;  // kClampFront / kClampRear
  double omega_virt = 0;  // after saturation scaling
  double s_demand = 0, s_achieved = 0;
};

/// Output of one memoryless evaluation of the kinematic loop.
struct KinematicCommand {
  PoseError err;
  double v_w_d = 0;
  double delta_f_d = 0, delta_r_d = 0;
  double omega_f_d = 0, omega_r_d = 0;
  double omega_virt = 0;
  bool saturated = false;  // steering angle or yaw demand clamped
  unsigned clamps = 0;     // kClamp* bits, rate limits included

  Vec3 v_d() const { return {v_w_d, omega_f_d, omega_r_d}; }
};

struct ReferenceState {
  double v_w_d = 0;
  double delta_f_d = 0, delta_r_d = 0;
  double omega_f_d = 0, omega_r_d = 0;
  Vec3 v_dot_d = Vec3::Zero();
  double omega_virt = 0;
  bool saturated = false;
  unsigned clamps = 0;
  bool primed = false;  // false until the first step seeds the filter

  BodyVelocity v_d() const { return {v_w_d, omega_f_d, omega_r_d}; }
};

double wrap_angle(double angle);                 // into (-pi, pi]
double unwrap_near(double reference, double angle);
double sgn_eps(double v);                        // sign with sgn(0) = +1

PoseError pose_error(const ConfigState& q, const PoseRef& ref, bool wrap_heading = true);
TrackingCommand tracking_law(const PoseError& err, const PoseRef& ref, const KinGains& g);

SteeringSeed steering_seed(const PoseError& err, const PoseRef& ref, const KinGains& g,
                           const RobotParams& p);
SteeringCommand steering_map(const PoseError& err, const PoseRef& ref, const KinGains& g,
                             const RobotParams& p, double v_w_d, double omega_virt);
std::pair<double, double> steering_rate_law(double delta_f, double delta_r, double delta_f_d,
                                            double delta_r_d, const KinGains& g);

// Full kinematic loop without memory. The wheel-speed command is the signed
// magnitude of the desired body velocity so sideways (crab) motion is tracked.
KinematicCommand kinematic_command(const ConfigState& q, const PoseRef& ref, const KinGains& g,
                                   const RobotParams& p);

// Discrete-time step: kinematic_command plus unwrapping and a filtered
// backward difference for v_dot_d.
ReferenceState reference_step(const ConfigState& q, const PoseRef& ref, const KinGains& g,
                              const RobotParams& p, const ReferenceState& prev, double dt);

}  // namespace fwis
