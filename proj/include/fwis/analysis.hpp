#pragma once

#include "fwis/bounds.hpp"
#include "fwis/dyncontrol.hpp"
#include "fwis/sim.hpp"
#include "fwis/types.hpp"
#include "fwis/uncertainty.hpp"

#include <string>
#include <vector>

namespace fwis {

// V = 1/2 e_v^T M~(q) e_v + 1/2 eta^T K_I eta with torque-domain K_I.
double storage(const Vec3& e_v, const Vec3& eta, const ConfigState& q, const Vec3& ki_torque,
               const RobotParams& p);

/// Controller-side quantities for each row: q_d and v_dot_d (taken from the
/// trace when run() filled them in, rebuilt from v_d otherwise), V_dot and
/// the residual r.
struct Reconstruction {
  std::vector<double> t;
  std::vector<Vec6> q_d;
  std::vector<Vec3> v_dot_d;
  std::vector<double> V_dot;
  std::vector<Vec3> u_d, r, u_c;
  std::vector<double> q_err;  // ||q - q_d||
  double h = 0;               // row spacing
};

// Throws InvalidInput if the trace has fewer than 5 rows or a non-uniform grid.
Reconstruction reconstruct(const SimTrace& trace, const UncertaintyModel& model, const RobotParams& p);

// 4th-order derivative of uniformly spaced samples (one-sided at the ends).
std::vector<double> derivative_4th(const std::vector<double>& f, double h);

enum class CheckStatus { pass, fail, skipped, uncertified };
std::string to_string(CheckStatus s);

/// Signed slack series of a pointwise check; slack >= -tolerance passes.
struct CheckSeries {
  std::string name;
  CheckStatus status = CheckStatus::skipped;
  std::vector<double> t, slack;
  double worst_slack = 0;
  double worst_t = 0;
  double tolerance = 0;
  std::string diagnostic;
  bool ok() const { return status != CheckStatus::fail; }
};

// slack = tol - |V_dot - (-e^T K_P e + e^T u_c)|; reported value is the raw
// residual via `max_residual`. The identity only holds for the unmodified PI
// law with a smooth reference, so rows within the derivative stencil of an
// integrator/torque saturation or of a steering saturation switch are
// excluded (counted in `excluded`, slack left at tol).
struct PassivityResult {
  CheckSeries series;
  std::vector<double> residual;
  double max_residual = 0;
  double max_V = 0;
  std::size_t excluded = 0;
};

PassivityResult exact_passivity_check(const SimTrace& trace, const PIGains& gains,
                                      const UncertaintyModel& model, const RobotParams& p,
                                      double rel_tol = 1e-4, const Reconstruction* rec = nullptr);

struct LyapunovResult {
  CheckSeries series;  // slack = -mu |e|^2 + rho - V_dot
  std::size_t outside_ball = 0;             // samples with |e_v| > sqrt(rho/mu)
  std::size_t outside_ball_nonnegative = 0; // ... of which V_dot >= 0
};

LyapunovResult lyap_bound_check(const SimTrace& trace, const BoundSet& bounds,
                                const GainCertificate& cert, const UncertaintyModel& model,
                                const RobotParams& p, const Reconstruction* rec = nullptr);

struct L2Report {
  CheckStatus status = CheckStatus::skipped;
  double y_norm2 = 0, u_norm2 = 0, V0 = 0, rho_integral = 0;
  double lhs = 0, rhs = 0, slack = 0;
  double empirical_ratio = 0;  // ||y|| / ||u||
  double gain_bound = 0;       // 1/mu
  double mu = 0;
  std::string diagnostic;
  bool ok() const { return status != CheckStatus::fail; }
};

L2Report l2_gain_check(const SimTrace& trace, const GainCertificate& cert, const BoundSet& bounds,
                       const UncertaintyModel& model, const RobotParams& p,
                       const Reconstruction* rec = nullptr);

CheckSeries residual_bound_check(const SimTrace& trace, const BoundSet& bounds,
                                 const UncertaintyModel& model, const RobotParams& p,
                                 const Reconstruction* rec = nullptr);

// a1 |e|^2 <= e^T M~ e <= a2 |e|^2 and V >= e^T M~ e / 2 on every row.
CheckSeries storage_sandwich_check(const SimTrace& trace, const BoundSet& bounds, const RobotParams& p);

struct TrackingMetrics {
  double window_start = 0;
  std::size_t samples = 0;
  double rms_pos = 0, rms_heading = 0;
  Vec3 rms_ev = Vec3::Zero(), max_ev = Vec3::Zero();
};

TrackingMetrics tracking_metrics(const SimTrace& trace, double window_start = 5.0);

struct AnalysisOptions {
  bool passivity = true, lyapunov = true, l2 = true, residual = true, storage = true;
  double passivity_rel_tol = 1e-4;
  double transient = 5.0;
};

struct StabilityReport {
  GainCertificate cert;
  BoundSet bounds;
  PassivityResult passivity;
  LyapunovResult lyapunov;
  L2Report l2;
  CheckSeries residual;
  CheckSeries storage;
  TrackingMetrics tracking;
  std::vector<double> t, V;
  std::vector<std::string> warnings;
  bool pass = true;
};

StabilityReport analyze(const SimTrace& trace, const PIGains& gains, const UncertaintyModel& model,
                        const RobotParams& p, const BoundSet& bounds, const GainCertificate& cert,
                        const AnalysisOptions& opts = {});

}  // namespace fwis
