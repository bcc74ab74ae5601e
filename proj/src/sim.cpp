#include "fwis/sim.hpp"

#include "fwis/model.hpp"

#include <cmath>
#include <sstream>

namespace fwis {

std::string to_string(Integrator v) { return v == Integrator::rk4 ? "rk4" : "euler"; }
std::string to_string(ControlMode v) { return v == ControlMode::continuous ? "continuous" : "zoh"; }
std::string to_string(InitialMode v) {
  switch (v) {
    case InitialMode::at_rest: return "at_rest";
    case InitialMode::on_reference: return "on_reference";
    case InitialMode::explicit_state: return "explicit";
  }
  return "at_rest";
}

Integrator integrator_from_string(const std::string& s) {
  if (s == "rk4") return Integrator::rk4;
  if (s == "euler") return Integrator::euler;
  throw InvalidInput("unknown integrator '" + s + "'");
}

ControlMode control_mode_from_string(const std::string& s) {
  if (s == "continuous") return ControlMode::continuous;
  if (s == "zoh") return ControlMode::zoh;
  throw InvalidInput("unknown control mode '" + s + "'");
}

InitialMode initial_mode_from_string(const std::string& s) {
  for (auto m : {InitialMode::at_rest, InitialMode::on_reference, InitialMode::explicit_state})
    if (to_string(m) == s) return m;
  throw InvalidInput("unknown initial mode '" + s + "'");
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::floor(T / dt + 1e-9));
}

std::size_t SimConfig::expected_rows() const {
  return static_cast<std::size_t>(std::floor(T / (dt * record_stride) + 1e-9)) + 1;
}

void SimConfig::validate() const {
  if (!(std::isfinite(dt) && dt > 0.0)) throw InvalidInput("sim.dt must be positive");
  if (!(std::isfinite(T) && T >= 0.0)) throw InvalidInput("sim.T must be non-negative");
  if (record_stride < 1) throw InvalidInput("sim.record_stride must be >= 1");
  if (!(divergence_limit > 0.0)) throw InvalidInput("sim.divergence_limit must be positive");
}

DynamicsRates dynamics_rhs(const ConfigState& q, const BodyVelocity& v, const Wrench& tau,
                           const UncertaintyModel& model, const RobotParams& p, double t) {
  DynamicsRates out;
  const Mat63 J = jacobian(q, p);
  const Vec3 vv = v.vec();
  out.q_dot = J * vv;
  const Vec3 ft = J.transpose() * eval_f(model, q, out.q_dot, t);
  const double c11 = c_tilde_11(q.delta_f, q.delta_r, v.omega_f, v.omega_r, p);
  const double m11 = m_tilde_11(q.delta_f, q.delta_r, p);
  const double b11 = b_tilde_11(q.delta_f, q.delta_r, p);
  out.v_dot[0] = (b11 * tau.tau_w - c11 * v.v_w - ft[0]) / m11;
  out.v_dot[1] = (2.0 * tau.tau_f - ft[1]) / (2.0 * p.I_delta);
  out.v_dot[2] = (2.0 * tau.tau_r - ft[2]) / (2.0 * p.I_delta);
  return out;
}

namespace {

// Continuous-mode state: q, v, q_d, eta, command filter z.
using State = Eigen::Matrix<double, 21, 1>;

ConfigState q_of(const State& x) { return ConfigState::from(x.segment<6>(0)); }
BodyVelocity v_of(const State& x) { return BodyVelocity::from(x.segment<3>(6)); }
ConfigState qd_of(const State& x) { return ConfigState::from(x.segment<6>(9)); }

struct Context {
  const SimConfig& cfg;
  const TrajectorySpec& traj;
  const KinGains& kin;
  const PIGains& pi;
  const UncertaintyModel& model;
  const RobotParams& p;
};

// Everything the closed loop produces at one instant.
struct LoopEval {
  KinematicCommand cmd;
  Vec3 v_d, v_dot_d, e_v, tau;
  bool torque_sat = false;
};

LoopEval evaluate_loop(const Context& c, double t, const State& x) {
  LoopEval ev;
  const ConfigState q = q_of(x);
  ev.cmd = kinematic_command(q, c.traj.at(t), c.kin, c.p);
  const Vec3 z = x.segment<3>(18);
  ev.v_d = z;
  ev.v_dot_d = (ev.cmd.v_d() - z) / c.kin.tau_ff;
  ev.e_v = x.segment<3>(6) - ev.v_d;
  const Vec3 u_d = feedforward(qd_of(x), ev.v_d, ev.v_dot_d, c.p);
  ev.tau = control_torque(q, ev.e_v, x.segment<3>(15), u_d, c.pi, c.p, &ev.torque_sat);
  return ev;
}

State continuous_rhs(const Context& c, double t, const State& x) {
  const LoopEval ev = evaluate_loop(c, t, x);
  const DynamicsRates dyn = dynamics_rhs(q_of(x), v_of(x), Wrench::from(ev.tau), c.model, c.p, t);
  State dx;
  dx.segment<6>(0) = dyn.q_dot;
  dx.segment<3>(6) = dyn.v_dot;
  dx.segment<6>(9) = jacobian(qd_of(x), c.p) * ev.v_d;
  dx.segment<3>(15) = integral_rate(x.segment<3>(15), ev.e_v, c.pi.eta_limit);
  dx.segment<3>(18) = ev.v_dot_d;
  return dx;
}

double storage_value(const ConfigState& q, const Vec3& e_v, const Vec3& eta, const PIGains& pi,
                     const RobotParams& p) {
  return 0.5 * e_v.dot(m_tilde(q, p) * e_v) + 0.5 * eta.dot(pi.ki_torque().cwiseProduct(eta));
}

void guard(const State& x, double t, double limit) {
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || std::abs(x[i]) > limit) {
      std::ostringstream os;
      os << "divergence guard tripped at t=" << t << ": state component " << i << " = " << x[i]
         << " exceeds " << limit;
      throw DivergenceError(os.str(), t);
    }
  }
}

// Initial (q, v, z): the steering is seeded from the reference motion.
void initial_state(const Context& c, State& x) {
  x.setZero();
  ConfigState q = c.cfg.q0;
  BodyVelocity v = c.cfg.v0;
  const PoseRef ref0 = c.traj.at(0.0);
  if (c.cfg.initial != InitialMode::explicit_state) {
    q = ConfigState{ref0.x_d, ref0.y_d, ref0.theta_d, 0.0, 0.0, 0.0};
    const KinematicCommand seed = kinematic_command(q, ref0, c.kin, c.p);
    q.delta_f = seed.delta_f_d;
    q.delta_r = seed.delta_r_d;
    v = c.cfg.initial == InitialMode::on_reference
            ? BodyVelocity::from(kinematic_command(q, ref0, c.kin, c.p).v_d())
            : BodyVelocity{};
  }
  x.segment<6>(0) = q.vec();
  x.segment<3>(6) = v.vec();
  x.segment<6>(9) = q.vec();
  x.segment<3>(18) = kinematic_command(q, ref0, c.kin, c.p).v_d();
}

unsigned sat_flags(unsigned clamps, bool torque) { return clamps | (torque ? kSatTorque : 0u); }

TraceRow make_row(const Context& c, double t, const State& x, const KinematicCommand& cmd,
                  const Vec3& v_d, const Vec3& e_v, const Vec3& tau, const Vec3& eta, unsigned sat,
                  double delta_f_d, double delta_r_d) {
  TraceRow row;
  row.t = t;
  row.q = q_of(x);
  row.v = v_of(x);
  row.v_d = BodyVelocity::from(v_d);
  row.delta_f_d = delta_f_d;
  row.delta_r_d = delta_r_d;
  row.tau = Wrench::from(tau);
  row.e_v = e_v;
  row.pose_err = cmd.err;
  const Mat63 J = jacobian(row.q, c.p);
  row.f_tilde = J.transpose() * eval_f(c.model, row.q, J * row.v.vec(), t);
  row.V = storage_value(row.q, e_v, eta, c.pi, c.p);
  row.sat = sat;
  for (int i = 0; i < 3; ++i)
    if (std::abs(eta[i]) >= c.pi.eta_limit[i]) row.sat |= kSatIntegrator;
  return row;
}

SimTrace run_continuous(const Context& c) {
  SimTrace trace;
  trace.dt = c.cfg.dt;
  trace.stride = c.cfg.record_stride;
  trace.rows.reserve(c.cfg.expected_rows());
  State x;
  initial_state(c, x);
  auto rhs = [&c](double t, const State& s) { return continuous_rhs(c, t, s); };
  const std::size_t n = c.cfg.steps();
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * c.cfg.dt;
    if (k % static_cast<std::size_t>(c.cfg.record_stride) == 0) {
      const LoopEval ev = evaluate_loop(c, t, x);
      trace.rows.push_back(make_row(c, t, x, ev.cmd, ev.v_d, ev.e_v, ev.tau, x.segment<3>(15),
                                    sat_flags(ev.cmd.clamps, ev.torque_sat), ev.cmd.delta_f_d,
                                    ev.cmd.delta_r_d));
      trace.q_d.push_back(x.segment<6>(9));
      trace.v_dot_d.push_back(ev.v_dot_d);
    }
    if (k == n) break;
    x = c.cfg.integrator == Integrator::rk4 ? rk4_step(x, rhs, t, c.cfg.dt)
                                            : euler_step(x, rhs, t, c.cfg.dt);
    guard(x, t + c.cfg.dt, c.cfg.divergence_limit);
  }
  return trace;
}

SimTrace run_zoh(const Context& c) {
  SimTrace trace;
  trace.dt = c.cfg.dt;
  trace.stride = c.cfg.record_stride;
  trace.rows.reserve(c.cfg.expected_rows());
  State x;
  initial_state(c, x);
  ReferenceState ref;
  ControllerState ctrl;
  const std::size_t n = c.cfg.steps();
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * c.cfg.dt;
    const ConfigState q = q_of(x);
    const PoseRef pose = c.traj.at(t);
    ref = reference_step(q, pose, c.kin, c.p, ref, c.cfg.dt);
    const ControlOutput out = control_step(q, v_of(x), ref, qd_of(x), c.pi, ctrl, c.cfg.dt, c.p);
    ctrl = out.state;
    x.segment<3>(15) = ctrl.eta;
    x.segment<3>(18) = ref.v_d().vec();
    if (k % static_cast<std::size_t>(c.cfg.record_stride) == 0) {
      KinematicCommand cmd;
      cmd.err = pose_error(q, pose);
      trace.rows.push_back(make_row(c, t, x, cmd, ref.v_d().vec(), out.e_v, out.tau.vec(), ctrl.eta,
                                    sat_flags(ref.clamps, out.saturated), ref.delta_f_d, ref.delta_r_d));
      trace.q_d.push_back(x.segment<6>(9));
      trace.v_dot_d.push_back(ref.v_dot_d);
    }
    if (k == n) break;
    const Wrench tau = out.tau;
    const Vec3 v_d = ref.v_d().vec();
    auto rhs = [&](double tt, const State& s) {
      State dx = State::Zero();
      const DynamicsRates dyn = dynamics_rhs(q_of(s), v_of(s), tau, c.model, c.p, tt);
      dx.segment<6>(0) = dyn.q_dot;
      dx.segment<3>(6) = dyn.v_dot;
      dx.segment<6>(9) = jacobian(qd_of(s), c.p) * v_d;
      return dx;
    };
    x = c.cfg.integrator == Integrator::rk4 ? rk4_step(x, rhs, t, c.cfg.dt)
                                            : euler_step(x, rhs, t, c.cfg.dt);
    guard(x, t + c.cfg.dt, c.cfg.divergence_limit);
  }
  return trace;
}

}  // namespace

SimTrace run(const SimConfig& cfg, const TrajectorySpec& traj, const KinGains& kin, const PIGains& pi,
             const UncertaintyModel& model, const RobotParams& p) {
  cfg.validate();
  traj.validate();
  kin.validate();
  const Context c{cfg, traj, kin, pi, model, p};
  return cfg.control == ControlMode::continuous ? run_continuous(c) : run_zoh(c);
}

}  // namespace fwis
