#pragma once

#include "fwis/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fwis {

enum class DisturbanceKind { none, viscous, constant_bias, gravity_plane, thruster_pulse, composite };

std::string to_string(DisturbanceKind kind);
DisturbanceKind disturbance_kind_from_string(const std::string& name);

struct Pulse {
  double t_start = 0, t_end = 0;
  Vec6 force = Vec6::Zero();
};

// Per-coordinate bound |f_k| <= c_k + d_k |q_dot_k| plus Lipschitz caps.
struct UncertaintyBounds {
  Vec6 c = Vec6::Zero();
  Vec6 d = Vec6::Zero();
  double L_f1 = 0;
  double L_f2 = 0;
};

/// Memoryless disturbance f(q, q_dot, t) entering the dynamics with a minus
/// sign, i.e. f opposes the actuators. Gravity therefore appears as +m g along
/// the uphill direction.
struct UncertaintyModel {
  DisturbanceKind kind = DisturbanceKind::none;

  double b_f = 0;                 // viscous coefficient on phi (and steering, optionally)
  bool viscous_steering = false;
  Vec6 bias = Vec6::Zero();       // constant_bias
  double g = 9.81;                // gravity_plane
  double direction = -1.5707963267948966;  // world angle the gravity force points along
  double mass = 3.5;
  std::vector<Pulse> pulses;      // thruster_pulse
  std::vector<UncertaintyModel> parts;  // composite

  // Declared bounds; any field left empty falls back to the auto-derived value.
  std::optional<Vec6> declared_c, declared_d;
  std::optional<double> declared_L_f1, declared_L_f2;

  static UncertaintyModel none();
  static UncertaintyModel viscous(double b_f, bool on_steering = false);
  static UncertaintyModel constant_bias(const Vec6& bias);
  static UncertaintyModel gravity_plane(double mass, double g, double direction);
  static UncertaintyModel thruster_pulse(std::vector<Pulse> pulses);
  static UncertaintyModel composite(std::vector<UncertaintyModel> parts);

  UncertaintyBounds auto_bounds() const;
  UncertaintyBounds bounds() const;
  bool time_dependent() const;
};

Vec6 eval_f(const UncertaintyModel& model, const ConfigState& q, const Vec6& q_dot, double t);

struct AssumptionReport {
  bool pass = true;
  std::size_t samples = 0;
  double max_component_violation = 0;  // max_k |f_k| - c_k - d_k |q_dot_k|
  double max_norm_violation = 0;       // ||f|| - ||c|| - ||d|| ||q_dot||
  int worst_component = -1;
  Vec6 worst_q = Vec6::Zero();
  Vec6 worst_q_dot = Vec6::Zero();
  double worst_t = 0;
  // Lipschitz-in-velocity quotient; skipped for time-dependent models.
  bool lipschitz_checked = false;
  double max_lipschitz_quotient = 0;
  std::string diagnostic;
};

AssumptionReport verify_assumption_bounds(const UncertaintyModel& model, const EnvelopeSpec& env,
                                          const RobotParams& p, std::size_t n_samples,
                                          std::uint64_t seed = 1);

}  // namespace fwis
