#include "fwis/uncertainty.hpp"

#include "fwis/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace fwis {

std::string to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::none: return "none";
    case DisturbanceKind::viscous: return "viscous";
    case DisturbanceKind::constant_bias: return "constant_bias";
    case DisturbanceKind::gravity_plane: return "gravity_plane";
    case DisturbanceKind::thruster_pulse: return "thruster_pulse";
    case DisturbanceKind::composite: return "composite";
  }
  return "none";
}

DisturbanceKind disturbance_kind_from_string(const std::string& name) {
  for (auto k : {DisturbanceKind::none, DisturbanceKind::viscous, DisturbanceKind::constant_bias,
                 DisturbanceKind::gravity_plane, DisturbanceKind::thruster_pulse,
                 DisturbanceKind::composite}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown disturbance kind '" + name + "'");
}

UncertaintyModel UncertaintyModel::none() { return {}; }

UncertaintyModel UncertaintyModel::viscous(double b_f, bool on_steering) {
  UncertaintyModel m;
  m.kind = DisturbanceKind::viscous;
  m.b_f = b_f;
  m.viscous_steering = on_steering;
  return m;
}

UncertaintyModel UncertaintyModel::constant_bias(const Vec6& bias) {
  UncertaintyModel m;
  m.kind = DisturbanceKind::constant_bias;
  m.bias = bias;
  return m;
}

UncertaintyModel UncertaintyModel::gravity_plane(double mass, double g, double direction) {
  UncertaintyModel m;
  m.kind = DisturbanceKind::gravity_plane;
  m.mass = mass;
  m.g = g;
  m.direction = direction;
  return m;
}

UncertaintyModel UncertaintyModel::thruster_pulse(std::vector<Pulse> pulses) {
  UncertaintyModel m;
  m.kind = DisturbanceKind::thruster_pulse;
  m.pulses = std::move(pulses);
  return m;
}

UncertaintyModel UncertaintyModel::composite(std::vector<UncertaintyModel> parts) {
  UncertaintyModel m;
  m.kind = DisturbanceKind::composite;
  m.parts = std::move(parts);
  return m;
}

namespace {

Vec6 gravity_vector(const UncertaintyModel& m) {
  // The gravity force F points along `direction`; f = -F because f enters the
  // dynamics as a resisting term.
  Vec6 f = Vec6::Zero();
  f[0] = -m.mass * m.g * std::cos(m.direction);
  f[1] = -m.mass * m.g * std::sin(m.direction);
  return f;
}

}  // namespace

UncertaintyBounds UncertaintyModel::auto_bounds() const {
  UncertaintyBounds out;
  switch (kind) {
    case DisturbanceKind::none:
      break;
    case DisturbanceKind::viscous:
      out.d[3] = b_f;
      if (viscous_steering) out.d[4] = out.d[5] = b_f;
      out.L_f2 = b_f;
      break;
    case DisturbanceKind::constant_bias:
      out.c = bias.cwiseAbs();
      break;
    case DisturbanceKind::gravity_plane:
      out.c = gravity_vector(*this).cwiseAbs();
      break;
    case DisturbanceKind::thruster_pulse:
      // Overlapping pulses add, so the sum of magnitudes is always safe.
      for (const auto& pulse : pulses) out.c += pulse.force.cwiseAbs();
      break;
    case DisturbanceKind::composite:
      for (const auto& part : parts) {
        const auto b = part.bounds();
        out.c += b.c;
        out.d += b.d;
        out.L_f1 += b.L_f1;
        out.L_f2 += b.L_f2;
      }
      break;
  }
  return out;
}

UncertaintyBounds UncertaintyModel::bounds() const {
  auto out = auto_bounds();
  if (declared_c) out.c = *declared_c;
  if (declared_d) out.d = *declared_d;
  if (declared_L_f1) out.L_f1 = *declared_L_f1;
  if (declared_L_f2) out.L_f2 = *declared_L_f2;
  return out;
}

bool UncertaintyModel::time_dependent() const {
  if (kind == DisturbanceKind::thruster_pulse) return true;
  for (const auto& part : parts)
    if (part.time_dependent()) return true;
  return false;
}

Vec6 eval_f(const UncertaintyModel& model, const ConfigState& q, const Vec6& q_dot, double t) {
  Vec6 f = Vec6::Zero();
  switch (model.kind) {
    case DisturbanceKind::none:
      break;
    case DisturbanceKind::viscous:
      f[3] = model.b_f * q_dot[3];
      if (model.viscous_steering) {
        f[4] = model.b_f * q_dot[4];
        f[5] = model.b_f * q_dot[5];
      }
      break;
    case DisturbanceKind::constant_bias:
      f = model.bias;
      break;
    case DisturbanceKind::gravity_plane:
      f = gravity_vector(model);
      break;
    case DisturbanceKind::thruster_pulse:
      for (const auto& pulse : model.pulses)
        if (t >= pulse.t_start && t < pulse.t_end) f += pulse.force;
      break;
    case DisturbanceKind::composite:
      for (const auto& part : model.parts) f += eval_f(part, q, q_dot, t);
      break;
  }
  return f;
}

namespace {

void collect_pulse_times(const UncertaintyModel& m, std::vector<double>& times) {
  for (const auto& pulse : m.pulses) times.push_back(pulse.t_start);
  for (const auto& part : m.parts) collect_pulse_times(part, times);
}

}  // namespace

AssumptionReport verify_assumption_bounds(const UncertaintyModel& model, const EnvelopeSpec& env,
                                          const RobotParams& p, std::size_t n_samples,
                                          std::uint64_t seed) {
  if (n_samples < 1) throw InvalidInput("verify_assumption_bounds needs at least one sample");
  const auto bnd = model.bounds();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  std::vector<double> pulse_times;
  collect_pulse_times(model, pulse_times);
  double horizon = 100.0;
  for (double t : pulse_times) horizon = std::max(horizon, t + 1.0);

  AssumptionReport rep;
  rep.samples = n_samples;
  rep.max_component_violation = -std::numeric_limits<double>::infinity();
  rep.max_norm_violation = -std::numeric_limits<double>::infinity();
  rep.lipschitz_checked = !model.time_dependent();

  for (std::size_t i = 0; i < n_samples; ++i) {
    ConfigState q{uni(-1, 1), uni(-1, 1), uni(-std::numbers::pi, std::numbers::pi),
                  uni(-std::numbers::pi, std::numbers::pi), uni(env.delta_lo, env.delta_hi),
                  uni(env.delta_lo, env.delta_hi)};
    Vec3 v(uni(-env.v_w_max, env.v_w_max), uni(-env.delta_dot_max, env.delta_dot_max),
           uni(-env.delta_dot_max, env.delta_dot_max));
    const Vec6 q_dot = jacobian(q, p) * v;
    const double t = i < pulse_times.size() ? pulse_times[i] : uni(0.0, horizon);
    const Vec6 f = eval_f(model, q, q_dot, t);

    for (int k = 0; k < 6; ++k) {
      const double viol = std::abs(f[k]) - bnd.c[k] - bnd.d[k] * std::abs(q_dot[k]);
      if (viol > rep.max_component_violation) {
        rep.max_component_violation = viol;
        rep.worst_component = k;
        rep.worst_q = q.vec();
        rep.worst_q_dot = q_dot;
        rep.worst_t = t;
      }
    }
    const double nviol = f.norm() - bnd.c.norm() - bnd.d.norm() * q_dot.norm();
    rep.max_norm_violation = std::max(rep.max_norm_violation, nviol);

    if (rep.lipschitz_checked) {
      Vec3 v2(uni(-env.v_w_max, env.v_w_max), uni(-env.delta_dot_max, env.delta_dot_max),
              uni(-env.delta_dot_max, env.delta_dot_max));
      const Vec6 q_dot2 = jacobian(q, p) * v2;
      const double den = (q_dot - q_dot2).norm();
      if (den > 1e-12) {
        const double quo = (f - eval_f(model, q, q_dot2, t)).norm() / den;
        rep.max_lipschitz_quotient = std::max(rep.max_lipschitz_quotient, quo);
      }
    }
  }

  // Component bounds imply the aggregated one only up to rounding.
  const double tol = 1e-12 * std::max(1.0, bnd.c.norm());
  rep.pass = rep.max_component_violation <= tol && rep.max_norm_violation <= tol;
  if (rep.lipschitz_checked && rep.max_lipschitz_quotient > bnd.L_f2 * (1 + 1e-12) + 1e-15)
    rep.pass = false;
  if (!rep.pass) {
    std::ostringstream os;
    os.precision(6);
    os << "declared bounds do not cover the model: worst component " << rep.worst_component
       << " violation " << rep.max_component_violation << " at t=" << rep.worst_t << ", q=["
       << rep.worst_q.transpose() << "], q_dot=[" << rep.worst_q_dot.transpose()
       << "]; norm violation " << rep.max_norm_violation;
    if (rep.lipschitz_checked)
      os << "; Lipschitz quotient " << rep.max_lipschitz_quotient << " vs L_f2 " << bnd.L_f2;
    rep.diagnostic = os.str();
  }
  return rep;
}

}  // namespace fwis
