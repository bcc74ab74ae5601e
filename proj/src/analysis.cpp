#include "fwis/analysis.hpp"

#include "fwis/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fwis {

double storage(const Vec3& e_v, const Vec3& eta, const ConfigState& q, const Vec3& ki_torque,
               const RobotParams& p) {
  return 0.5 * e_v.dot(m_tilde(q, p) * e_v) + 0.5 * eta.dot(ki_torque.cwiseProduct(eta));
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
    case CheckStatus::uncertified: return "uncertified";
  }
  return "skipped";
}

std::vector<double> derivative_4th(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 5) throw InvalidInput("derivative_4th needs at least 5 samples");
  std::vector<double> d(n);
  const double s = 1.0 / (12.0 * h);
  d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) * s;
  d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) * s;
  for (std::size_t k = 2; k + 2 < n; ++k) d[k] = (f[k - 2] - 8 * f[k - 1] + 8 * f[k + 1] - f[k + 2]) * s;
  d[n - 2] = (3 * f[n - 1] + 10 * f[n - 2] - 18 * f[n - 3] + 6 * f[n - 4] - f[n - 5]) * s;
  d[n - 1] = (25 * f[n - 1] - 48 * f[n - 2] + 36 * f[n - 3] - 16 * f[n - 4] + 3 * f[n - 5]) * s;
  return d;
}

namespace {

double uniform_spacing(const SimTrace& trace) {
  const auto& rows = trace.rows;
  if (rows.size() < 5) throw InvalidInput("trace needs at least 5 rows for reconstruction");
  const double h = (rows.back().t - rows.front().t) / static_cast<double>(rows.size() - 1);
  if (!(h > 0.0)) throw InvalidInput("trace times must be increasing");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (std::abs(rows[k].t - rows[k - 1].t - h) > 1e-6 * h)
      throw InvalidInput("trace rows are not uniformly spaced");
  }
  return h;
}

// Value at the midpoint of [k, k+1] by cubic Lagrange interpolation of get(i).
template <class Get>
auto midpoint(std::size_t n, std::size_t k, Get get) -> decltype(get(k)) {
  using T = decltype(get(k));
  if (k >= 1 && k + 2 < n) return T((-get(k - 1) + 9.0 * get(k) + 9.0 * get(k + 1) - get(k + 2)) / 16.0);
  if (k == 0) return T(0.3125 * get(0) + 0.9375 * get(1) - 0.3125 * get(2) + 0.0625 * get(3));
  return T(0.0625 * get(k - 2) - 0.3125 * get(k - 1) + 0.9375 * get(k) + 0.3125 * get(k + 1));
}

double tol_numeric(double scale) { return 1e-9 * std::max(1.0, scale); }

void finalize(CheckSeries& s, double tol) {
  s.tolerance = tol;
  s.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.slack.size(); ++k) {
    if (s.slack[k] < s.worst_slack) {
      s.worst_slack = s.slack[k];
      s.worst_t = s.t[k];
    }
  }
  if (s.slack.empty()) s.worst_slack = 0;
  s.status = s.worst_slack >= -tol ? CheckStatus::pass : CheckStatus::fail;
  if (s.status == CheckStatus::fail) {
    std::ostringstream os;
    os << s.name << " violated: worst slack " << s.worst_slack << " at t=" << s.worst_t
       << " (tolerance " << tol << ")";
    s.diagnostic = os.str();
  }
}

const Reconstruction& ensure(const SimTrace& trace, const UncertaintyModel& model, const RobotParams& p,
                             const Reconstruction* rec, Reconstruction& local) {
  if (rec) return *rec;
  local = reconstruct(trace, model, p);
  return local;
}

double rho_at(const BoundSet& b, double eps, double q_err) {
  return b.A_q * b.A_q / (2.0 * eps) * q_err * q_err + b.A_c * b.A_c / (2.0 * eps);
}

}  // namespace

namespace {

// q_d for CSV replays, which do not carry the controller internals. The gap
// g = q - q_d obeys g' = J(q) v - J(q - g) v_d with g(0) = 0; integrating the
// gap (RK4 on the row grid) instead of q_d itself keeps exact components exact
// (the steering and wheel-angle rows of g' are just e_v) and avoids drift.
// v_dot_d comes from finite differences.
void reconstruct_reference(const SimTrace& trace, const RobotParams& p, Reconstruction& rec) {
  const auto& rows = trace.rows;
  const std::size_t n = rows.size();
  const double h = rec.h;
  rec.q_d.resize(n);
  auto gap_rate = [&p](const Vec6& q, const Vec3& v, const Vec3& vd, const Vec6& g) {
    return Vec6(jacobian(ConfigState::from(q), p) * v - jacobian(ConfigState::from(Vec6(q - g)), p) * vd);
  };
  auto q_at = [&rows](std::size_t i) { return rows[i].q.vec(); };
  auto v_at = [&rows](std::size_t i) { return rows[i].v.vec(); };
  auto vd_at = [&rows](std::size_t i) { return rows[i].v_d.vec(); };
  Vec6 g = Vec6::Zero();
  rec.q_d[0] = q_at(0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec6 qm = midpoint(n, k, q_at);
    const Vec3 vm = midpoint(n, k, v_at), vdm = midpoint(n, k, vd_at);
    const Vec6 k1 = gap_rate(q_at(k), v_at(k), vd_at(k), g);
    const Vec6 k2 = gap_rate(qm, vm, vdm, g + 0.5 * h * k1);
    const Vec6 k3 = gap_rate(qm, vm, vdm, g + 0.5 * h * k2);
    const Vec6 k4 = gap_rate(q_at(k + 1), v_at(k + 1), vd_at(k + 1), g + h * k3);
    g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rec.q_d[k + 1] = q_at(k + 1) - g;
  }
  rec.v_dot_d.assign(n, Vec3::Zero());
  for (int i = 0; i < 3; ++i) {
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = rows[k].v_d.vec()[i];
    const auto d = derivative_4th(col, h);
    for (std::size_t k = 0; k < n; ++k) rec.v_dot_d[k][i] = d[k];
  }
}

}  // namespace

Reconstruction reconstruct(const SimTrace& trace, const UncertaintyModel& model, const RobotParams& p) {
  const auto& rows = trace.rows;
  Reconstruction rec;
  rec.h = uniform_spacing(trace);
  const std::size_t n = rows.size();
  const double h = rec.h;

  rec.t.resize(n);
  for (std::size_t k = 0; k < n; ++k) rec.t[k] = rows[k].t;
  if (trace.q_d.size() == n && trace.v_dot_d.size() == n) {
    rec.q_d = trace.q_d;
    rec.v_dot_d = trace.v_dot_d;
  } else {
    reconstruct_reference(trace, p, rec);
  }
  std::vector<double> V(n);
  for (std::size_t k = 0; k < n; ++k) V[k] = rows[k].V;
  rec.V_dot = derivative_4th(V, h);

  rec.u_d.resize(n);
  rec.r.resize(n);
  rec.u_c.resize(n);
  rec.q_err.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const TraceRow& row = rows[k];
    const ConfigState qd = ConfigState::from(rec.q_d[k]);
    const Vec3 vd = row.v_d.vec();
    rec.u_d[k] = feedforward(qd, vd, rec.v_dot_d[k], p);
    const Mat63 J = jacobian(row.q, p);
    const Vec3 f_vd = J.transpose() * eval_f(model, row.q, J * vd, row.t);
    rec.r[k] = m_tilde(row.q, p) * rec.v_dot_d[k] + c_tilde(row.q, row.v.omega_f, row.v.omega_r, p) * vd +
               f_vd - rec.u_d[k];
    rec.u_c[k] = -(row.f_tilde - f_vd) - rec.r[k];
    rec.q_err[k] = (row.q.vec() - rec.q_d[k]).norm();
  }
  return rec;
}

PassivityResult exact_passivity_check(const SimTrace& trace, const PIGains& gains,
                                      const UncertaintyModel& model, const RobotParams& p,
                                      double rel_tol, const Reconstruction* rec_in) {
  Reconstruction local;
  const Reconstruction& rec = ensure(trace, model, p, rec_in, local);
  PassivityResult out;
  out.series.name = "exact_passivity";
  const Vec3 kp = gains.kp_torque();
  const std::size_t n = trace.rows.size();
  std::vector<bool> skip(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    // Steering saturation switching on or off puts a kink in the reference, which
    // the finite-difference V_dot cannot resolve; while it stays on the law is smooth.
    const bool pi_sat = trace.rows[k].sat & (kSatIntegrator | kSatTorque);
    const bool kink = k > 0 && ((trace.rows[k].sat ^ trace.rows[k - 1].sat) & kSatReference);
    if (!pi_sat && !kink) continue;
    for (std::size_t j = k >= 3 ? k - 3 : 0; j <= std::min(n - 1, k + 2); ++j) skip[j] = true;
  }
  out.residual.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& e = trace.rows[k].e_v;
    const double rhs = -e.dot(kp.cwiseProduct(e)) + e.dot(rec.u_c[k]);
    out.residual[k] = rec.V_dot[k] - rhs;
    out.max_V = std::max(out.max_V, trace.rows[k].V);
    if (skip[k]) {
      ++out.excluded;
      continue;
    }
    out.max_residual = std::max(out.max_residual, std::abs(out.residual[k]));
  }
  const double tol = rel_tol * std::max(1.0, out.max_V);
  out.series.t = rec.t;
  out.series.slack.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.series.slack[k] = skip[k] ? tol : tol - std::abs(out.residual[k]);
  finalize(out.series, 0.0);
  out.series.tolerance = tol;
  if (out.excluded)
    out.series.diagnostic = std::to_string(out.excluded) + " rows near saturation events excluded";
  return out;
}

LyapunovResult lyap_bound_check(const SimTrace& trace, const BoundSet& bounds,
                                const GainCertificate& cert, const UncertaintyModel& model,
                                const RobotParams& p, const Reconstruction* rec_in) {
  Reconstruction local;
  const Reconstruction& rec = ensure(trace, model, p, rec_in, local);
  LyapunovResult out;
  out.series.name = "lyapunov_bound";
  const std::size_t n = trace.rows.size();
  out.series.t = rec.t;
  out.series.slack.resize(n);
  double scale = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e2 = trace.rows[k].e_v.squaredNorm();
    const double rho = rho_at(bounds, cert.epsilon, rec.q_err[k]);
    out.series.slack[k] = -cert.mu * e2 + rho - rec.V_dot[k];
    scale = std::max({scale, std::abs(rec.V_dot[k]), std::abs(cert.mu * e2)});
    if (cert.mu > 0.0 && std::sqrt(e2) > std::sqrt(rho / cert.mu)) {
      ++out.outside_ball;
      if (rec.V_dot[k] >= 0.0) ++out.outside_ball_nonnegative;
    }
  }
  finalize(out.series, tol_numeric(scale));
  return out;
}

L2Report l2_gain_check(const SimTrace& trace, const GainCertificate& cert, const BoundSet& bounds,
                       const UncertaintyModel& model, const RobotParams& p, const Reconstruction* rec_in) {
  L2Report out;
  out.mu = cert.mu;
  if (!cert.pass) {
    out.status = CheckStatus::uncertified;
    out.diagnostic = "gain condition not met (mu <= 0); L2 inequality not applicable";
    out.gain_bound = std::numeric_limits<double>::infinity();
    return out;
  }
  Reconstruction local;
  const Reconstruction& rec = ensure(trace, model, p, rec_in, local);
  const auto& rows = trace.rows;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double dt = rows[k + 1].t - rows[k].t;
    out.y_norm2 += 0.5 * dt * (rows[k].e_v.squaredNorm() + rows[k + 1].e_v.squaredNorm());
    out.u_norm2 += 0.5 * dt * (rows[k].f_tilde.squaredNorm() + rows[k + 1].f_tilde.squaredNorm());
    out.rho_integral += 0.5 * dt * (rho_at(bounds, cert.epsilon, rec.q_err[k]) +
                                    rho_at(bounds, cert.epsilon, rec.q_err[k + 1]));
  }
  out.V0 = rows.front().V;
  out.lhs = out.y_norm2;
  out.rhs = out.u_norm2 / (cert.mu * cert.mu) + 2.0 / cert.mu * (out.V0 + out.rho_integral);
  out.slack = out.rhs - out.lhs;
  out.gain_bound = 1.0 / cert.mu;
  out.empirical_ratio = out.u_norm2 > 0.0 ? std::sqrt(out.y_norm2 / out.u_norm2)
                                          : std::numeric_limits<double>::infinity();
  const double tol = tol_numeric(std::max(out.lhs, out.rhs));
  out.status = out.slack >= -tol ? CheckStatus::pass : CheckStatus::fail;
  if (out.status == CheckStatus::fail) {
    std::ostringstream os;
    os << "L2 inequality violated: ||y||^2 = " << out.lhs << " > " << out.rhs;
    out.diagnostic = os.str();
  }
  return out;
}

CheckSeries residual_bound_check(const SimTrace& trace, const BoundSet& bounds,
                                 const UncertaintyModel& model, const RobotParams& p,
                                 const Reconstruction* rec_in) {
  Reconstruction local;
  const Reconstruction& rec = ensure(trace, model, p, rec_in, local);
  CheckSeries s;
  s.name = "residual_bound";
  const std::size_t n = trace.rows.size();
  s.t = rec.t;
  s.slack.resize(n);
  double scale = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double bound = bounds.A_q * rec.q_err[k] + bounds.A_v * trace.rows[k].e_v.norm() + bounds.A_c;
    const double rn = rec.r[k].norm();
    s.slack[k] = bound - rn;
    scale = std::max({scale, bound, rn});
  }
  finalize(s, tol_numeric(scale));
  return s;
}

CheckSeries storage_sandwich_check(const SimTrace& trace, const BoundSet& bounds, const RobotParams& p) {
  CheckSeries s;
  s.name = "storage_sandwich";
  double scale = 0;
  for (const auto& row : trace.rows) {
    const Vec3& e = row.e_v;
    const double quad = e.dot(m_tilde(row.q, p) * e);
    const double e2 = e.squaredNorm();
    // Worst of the three one-sided conditions.
    const double slack = std::min({quad - bounds.a1 * e2, bounds.a2 * e2 - quad, row.V - 0.5 * quad});
    s.t.push_back(row.t);
    s.slack.push_back(slack);
    scale = std::max({scale, bounds.a2 * e2, row.V});
  }
  finalize(s, tol_numeric(scale));
  return s;
}

TrackingMetrics tracking_metrics(const SimTrace& trace, double window_start) {
  if (trace.rows.empty()) throw InvalidInput("tracking_metrics: empty trace");
  TrackingMetrics m;
  m.window_start = window_start;
  auto accumulate = [&m](const TraceRow& row) {
    m.rms_pos += row.pose_err.e_x * row.pose_err.e_x + row.pose_err.e_y * row.pose_err.e_y;
    m.rms_heading += row.pose_err.e_theta * row.pose_err.e_theta;
    m.rms_ev += row.e_v.cwiseAbs2();
    m.max_ev = m.max_ev.cwiseMax(row.e_v.cwiseAbs());
    ++m.samples;
  };
  for (const auto& row : trace.rows)
    if (row.t >= window_start) accumulate(row);
  if (m.samples == 0) {
    // Run shorter than the transient window: fall back to the whole trace.
    m.window_start = trace.rows.front().t;
    for (const auto& row : trace.rows) accumulate(row);
  }
  const double n = static_cast<double>(m.samples);
  m.rms_pos = std::sqrt(m.rms_pos / n);
  m.rms_heading = std::sqrt(m.rms_heading / n);
  m.rms_ev = (m.rms_ev / n).cwiseSqrt();
  return m;
}

StabilityReport analyze(const SimTrace& trace, const PIGains& gains, const UncertaintyModel& model,
                        const RobotParams& p, const BoundSet& bounds, const GainCertificate& cert,
                        const AnalysisOptions& opts) {
  StabilityReport rep;
  rep.cert = cert;
  rep.bounds = bounds;
  rep.tracking = tracking_metrics(trace, opts.transient);
  for (const auto& row : trace.rows) {
    rep.t.push_back(row.t);
    rep.V.push_back(row.V);
  }
  if (opts.storage) rep.storage = storage_sandwich_check(trace, bounds, p);

  const bool need_rec = opts.passivity || opts.lyapunov || opts.l2 || opts.residual;
  if (need_rec && trace.rows.size() < 5) {
    rep.warnings.push_back("trace shorter than 5 rows; derivative-based checks skipped");
  } else if (need_rec) {
    const Reconstruction rec = reconstruct(trace, model, p);
    if (opts.passivity)
      rep.passivity = exact_passivity_check(trace, gains, model, p, opts.passivity_rel_tol, &rec);
    if (opts.lyapunov) {
      if (cert.pass) {
        rep.lyapunov = lyap_bound_check(trace, bounds, cert, model, p, &rec);
      } else {
        rep.lyapunov.series.name = "lyapunov_bound";
        rep.lyapunov.series.status = CheckStatus::uncertified;
      }
    }
    if (opts.l2) rep.l2 = l2_gain_check(trace, cert, bounds, model, p, &rec);
    if (opts.residual) rep.residual = residual_bound_check(trace, bounds, model, p, &rec);
  }
  if (!cert.pass) rep.warnings.push_back("gains are not certified; Lyapunov and L2 checks reported as uncertified");
  unsigned seen = 0;
  for (const auto& row : trace.rows) seen |= row.sat;
  if (seen & kSatReference)
    rep.warnings.push_back("steering reference saturated on some rows (reference reshaped, identities unaffected)");
  if (seen & (kSatIntegrator | kSatTorque))
    rep.warnings.push_back("integrator or torque saturation on some rows; the passivity check skips them");
  rep.pass = rep.passivity.series.ok() && rep.lyapunov.series.ok() && rep.l2.ok() && rep.residual.ok() &&
             rep.storage.ok();
  return rep;
}

}  // namespace fwis
