#include "fwis/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fwis {

namespace {

std::string header_line() {
  std::string h;
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i) h += ',';
    h += kTraceColumns[i];
  }
  return h;
}

}  // namespace

std::array<double, 29> trace_row_values(const TraceRow& r) {
  return {r.t,          r.q.x,          r.q.y,          r.q.theta,      r.q.phi,        r.q.delta_f,
          r.q.delta_r,  r.v.v_w,        r.v.omega_f,    r.v.omega_r,    r.v_d.v_w,      r.v_d.omega_f,
          r.v_d.omega_r, r.delta_f_d,   r.delta_r_d,    r.tau.tau_w,    r.tau.tau_f,    r.tau.tau_r,
          r.e_v[0],     r.e_v[1],       r.e_v[2],       r.pose_err.e_x, r.pose_err.e_y, r.pose_err.e_theta,
          r.f_tilde[0], r.f_tilde[1],   r.f_tilde[2],   r.V,            static_cast<double>(r.sat)};
}

namespace {

TraceRow unflatten(const std::array<double, 29>& a) {
  TraceRow r;
  r.t = a[0];
  r.q = {a[1], a[2], a[3], a[4], a[5], a[6]};
  r.v = {a[7], a[8], a[9]};
  r.v_d = {a[10], a[11], a[12]};
  r.delta_f_d = a[13];
  r.delta_r_d = a[14];
  r.tau = {a[15], a[16], a[17]};
  r.e_v = Vec3(a[18], a[19], a[20]);
  r.pose_err = {a[21], a[22], a[23]};
  r.f_tilde = Vec3(a[24], a[25], a[26]);
  r.V = a[27];
  r.sat = static_cast<unsigned>(a[28]);
  return r;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json series_json(const CheckSeries& s, bool include_series) {
  json j = {{"name", s.name},
            {"status", to_string(s.status)},
            {"worst_slack", nullable(s.worst_slack)},
            {"worst_t", s.worst_t},
            {"tolerance", s.tolerance}};
  if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
  if (include_series) {
    j["t"] = s.t;
    j["slack"] = s.slack;
  }
  return j;
}

}  // namespace

void write_trace_csv(const SimTrace& trace, std::ostream& out) {
  out << header_line() << '\n';
  char buf[32];
  for (const auto& row : trace.rows) {
    const auto vals = trace_row_values(row);
    std::string line;
    line.reserve(29 * 24);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) line += ',';
      std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
      line += buf;
    }
    out << line << '\n';
  }
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file " + path);
  write_trace_csv(trace, out);
}

SimTrace read_trace_csv(std::istream& in) {
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  SimTrace trace;
  std::size_t pos = 0, line_no = 0;
  bool header_seen = false;
  while (pos < all.size()) {
    const std::size_t nl = all.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos)
      throw TraceParseError("line " + std::to_string(line_no) + ": truncated row (missing line terminator)");
    std::string line = all.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != header_line())
        throw TraceParseError("line 1: unexpected header, expected '" + header_line() + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::array<double, 29> vals{};
    std::size_t field = 0, start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      if (field >= vals.size())
        throw TraceParseError("line " + std::to_string(line_no) + ": too many fields");
      const char* b = line.data() + start;
      const char* e = line.data() + end;
      auto [ptr, ec] = std::from_chars(b, e, vals[field]);
      if (ec != std::errc() || ptr != e || b == e)
        throw TraceParseError("line " + std::to_string(line_no) + ", column " + kTraceColumns[field] +
                              ": not a number");
      ++field;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (field != vals.size())
      throw TraceParseError("line " + std::to_string(line_no) + ": expected 29 fields, found " +
                            std::to_string(field));
    if (!(vals[28] >= 0.0 && vals[28] <= kSatMax && vals[28] == std::floor(vals[28])))
      throw TraceParseError("line " + std::to_string(line_no) + ", column sat: expected a flag set 0..63");
    trace.rows.push_back(unflatten(vals));
  }
  if (!header_seen) throw TraceParseError("empty trace file");
  if (trace.rows.size() >= 2) trace.dt = trace.rows[1].t - trace.rows[0].t;
  return trace;
}

SimTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceParseError("cannot open trace file " + path);
  return read_trace_csv(in);
}

json bounds_to_json(const BoundSet& b) {
  return {{"a1", b.a1},         {"a2", b.a2},         {"b_c", b.b_c},       {"sigma_J", b.sigma_J},
          {"sigma_dJ", b.sigma_dJ}, {"L_M", b.L_M},   {"L_C1", b.L_C1},     {"L_C2", b.L_C2},
          {"c_tilde", b.c_tilde}, {"d_tilde", b.d_tilde}, {"d_v", b.d_v},   {"A_q", b.A_q},
          {"A_v", b.A_v},       {"A_c", b.A_c},       {"V_d", b.V_d},       {"A_d", b.A_d},
          {"coriolis_substitution", b.coriolis_substitution}};
}

json certificate_to_json(const ExperimentConfig& cfg, const BoundSet& b, const GainCertificate& c) {
  json j = config_to_json(cfg);
  return {{"config", cfg.name},
          {"constants", bounds_to_json(b)},
          {"envelope", j["envelope"]},
          {"gains", j["pi_gains"]},
          {"lambda_min_Kp", c.lambda_min_Kp},
          {"K_t", c.K_t},
          {"epsilon", c.epsilon},
          {"mu", c.mu},
          {"mu_limit", c.mu_limit},
          {"threshold", c.threshold},
          {"pass", c.pass},
          {"pass_limit", c.pass_limit},
          {"l2_gain_bound", nullable(c.l2_gain_bound)}};
}

json report_to_json(const StabilityReport& r, bool include_series) {
  json j;
  j["pass"] = r.pass;
  j["certificate"] = {{"mu", r.cert.mu},
                      {"epsilon", r.cert.epsilon},
                      {"threshold", r.cert.threshold},
                      {"pass", r.cert.pass},
                      {"l2_gain_bound", nullable(r.cert.l2_gain_bound)}};
  j["constants"] = bounds_to_json(r.bounds);
  j["passivity"] = series_json(r.passivity.series, include_series);
  j["passivity"]["max_residual"] = r.passivity.max_residual;
  j["passivity"]["max_V"] = r.passivity.max_V;
  if (include_series) j["passivity"]["residual"] = r.passivity.residual;
  j["lyapunov"] = series_json(r.lyapunov.series, include_series);
  j["lyapunov"]["outside_ball"] = r.lyapunov.outside_ball;
  j["lyapunov"]["outside_ball_nonnegative_Vdot"] = r.lyapunov.outside_ball_nonnegative;
  j["l2"] = {{"status", to_string(r.l2.status)},
             {"y_norm2", r.l2.y_norm2},
             {"u_norm2", r.l2.u_norm2},
             {"V0", r.l2.V0},
             {"rho_integral", r.l2.rho_integral},
             {"lhs", r.l2.lhs},
             {"rhs", r.l2.rhs},
             {"slack", r.l2.slack},
             {"empirical_ratio", nullable(r.l2.empirical_ratio)},
             {"gain_bound", nullable(r.l2.gain_bound)},
             {"mu", r.l2.mu}};
  if (!r.l2.diagnostic.empty()) j["l2"]["diagnostic"] = r.l2.diagnostic;
  j["residual"] = series_json(r.residual, include_series);
  j["storage_sandwich"] = series_json(r.storage, include_series);
  const auto& m = r.tracking;
  j["tracking"] = {{"window_start", m.window_start},
                   {"samples", m.samples},
                   {"rms_pos", m.rms_pos},
                   {"rms_heading", m.rms_heading},
                   {"rms_ev", {m.rms_ev[0], m.rms_ev[1], m.rms_ev[2]}},
                   {"max_ev", {m.max_ev[0], m.max_ev[1], m.max_ev[2]}}};
  if (include_series) {
    j["t"] = r.t;
    j["V"] = r.V;
  }
  j["warnings"] = r.warnings;
  return j;
}

std::string report_summary(const StabilityReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "certificate: " << (r.cert.pass ? "pass" : "fail") << " (mu = " << r.cert.mu << ")\n";
  os << "passivity:   " << to_string(r.passivity.series.status) << " (max residual " << r.passivity.max_residual
     << ", tol " << r.passivity.series.tolerance << ")\n";
  os << "lyapunov:    " << to_string(r.lyapunov.series.status) << " (min slack " << r.lyapunov.series.worst_slack
     << ")\n";
  os << "l2 gain:     " << to_string(r.l2.status) << " (slack " << r.l2.slack << ", ratio "
     << r.l2.empirical_ratio << " vs bound " << r.l2.gain_bound << ")\n";
  os << "residual:    " << to_string(r.residual.status) << " (min slack " << r.residual.worst_slack << ")\n";
  os << "storage:     " << to_string(r.storage.status) << "\n";
  os << "tracking:    rms_pos " << r.tracking.rms_pos << " m, rms_heading " << r.tracking.rms_heading
     << " rad (t >= " << r.tracking.window_start << " s)\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  os << "overall:     " << (r.pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace fwis
