#pragma once

#include "fwis/dyncontrol.hpp"
#include "fwis/kincontrol.hpp"
#include "fwis/trajectory.hpp"
#include "fwis/types.hpp"
#include "fwis/uncertainty.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwis {

enum class Integrator { rk4, euler };

// continuous: controller evaluated inside every integrator stage, with the
// velocity command passed through a first-order filter so v_dot_d is exact.
// zoh: controller sampled once per step and held (embedded-style).
enum class ControlMode { continuous, zoh };

// at_rest: robot on the reference pose, wheels still.
// on_reference: robot on the reference pose moving at the commanded velocity.
// explicit_state: q0 / v0 taken verbatim.
enum class InitialMode { at_rest, on_reference, explicit_state };

std::string to_string(Integrator v);
std::string to_string(ControlMode v);
std::string to_string(InitialMode v);
Integrator integrator_from_string(const std::string& s);
ControlMode control_mode_from_string(const std::string& s);
InitialMode initial_mode_from_string(const std::string& s);

struct SimConfig {
  double dt = 1e-3;
  double T = 70.0;
  Integrator integrator = Integrator::rk4;
  ControlMode control = ControlMode::continuous;
  int record_stride = 1;
  InitialMode initial = InitialMode::at_rest;
  ConfigState q0;
  BodyVelocity v0;
  double divergence_limit = 1e6;

  std::size_t steps() const;
  std::size_t expected_rows() const;
  void validate() const;
};

// Bits of TraceRow::sat. The kinematic clamps (kClamp*, values 1, 8, 16, 32)
// only reshape the reference; integrator and torque saturation modify the PI law.
inline constexpr unsigned kSatIntegrator = 2, kSatTorque = 4;
inline constexpr unsigned kSatReference = kClampFront | kClampRear | kClampRateFront | kClampRateRear;
inline constexpr unsigned kSatMax = 63;

/// One recorded row; the layout mirrors the CSV trace columns.
struct TraceRow {
  double t = 0;
  ConfigState q;
  BodyVelocity v;
  BodyVelocity v_d;
  double delta_f_d = 0, delta_r_d = 0;
  Wrench tau;
  Vec3 e_v = Vec3::Zero();
  PoseError pose_err;
  Vec3 f_tilde = Vec3::Zero();
  double V = 0;
  unsigned sat = 0;
};

inline constexpr std::array<const char*, 29> kTraceColumns = {
    "t",     "x",     "y",     "theta", "phi",   "delta_f", "delta_r", "v_w",  "omega_f", "omega_r",
    "vwd",   "omfd",  "omrd",  "delta_fd", "delta_rd", "tau_w", "tau_f", "tau_r", "ev1", "ev2",
    "ev3",   "ex",    "ey",    "etheta", "ft1",  "ft2",     "ft3",     "V",    "sat"};

struct SimTrace {
  std::vector<TraceRow> rows;
  // Controller internals per row. Filled by run(), absent after a CSV read;
  // analysis reconstructs them when missing.
  std::vector<Vec6> q_d;
  std::vector<Vec3> v_dot_d;
  double dt = 0;   // integrator step the trace was produced with
  int stride = 1;  // rows are dt * stride apart
  double row_spacing() const { return dt * stride; }
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;
};

struct DynamicsRates {
  Vec6 q_dot = Vec6::Zero();
  Vec3 v_dot = Vec3::Zero();
};

// q_dot = J(q) v;  M~ v_dot = B~ tau - C~ v - f~.
DynamicsRates dynamics_rhs(const ConfigState& q, const BodyVelocity& v, const Wrench& tau,
                           const UncertaintyModel& model, const RobotParams& p, double t);

/// Classical fourth-order Runge-Kutta step of x' = rhs(t, x).
template <class State, class Rhs>
State rk4_step(const State& x, Rhs&& rhs, double t, double dt) {
  const State k1 = rhs(t, x);
  const State k2 = rhs(t + 0.5 * dt, State(x + 0.5 * dt * k1));
  const State k3 = rhs(t + 0.5 * dt, State(x + 0.5 * dt * k2));
  const State k4 = rhs(t + dt, State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class State, class Rhs>
State euler_step(const State& x, Rhs&& rhs, double t, double dt) {
  return x + dt * rhs(t, x);
}

SimTrace run(const SimConfig& cfg, const TrajectorySpec& traj, const KinGains& kin, const PIGains& pi,
             const UncertaintyModel& model, const RobotParams& p);

}  // namespace fwis
