#include "fwis/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fwis {

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::flower: return "flower";
    case TrajectoryKind::lissajous: return "lissajous";
    case TrajectoryKind::samples: return "samples";
  }
  return "flower";
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  for (auto k : {TrajectoryKind::flower, TrajectoryKind::lissajous, TrajectoryKind::samples})
    if (to_string(k) == name) return k;
  throw InvalidInput("unknown trajectory kind '" + name + "'");
}

PoseRef flower_ref(double t, const FlowerParams& fp) {
  const double w1 = 2.0 * std::numbers::pi / fp.petal_period;
  const double w2 = 2.0 * std::numbers::pi / fp.sweep_period;
  const double c1 = std::cos(w1 * t), s1 = std::sin(w1 * t);
  const double c2 = std::cos(w2 * t), s2 = std::sin(w2 * t);
  const double A = fp.amplitude;

  PoseRef ref;
  ref.x_d = A * c1 * c2 + fp.cx;
  ref.y_d = A * c1 * s2 + fp.cy;
  ref.x_dot_d = A * (-w1 * s1 * c2 - w2 * c1 * s2);
  ref.y_dot_d = A * (-w1 * s1 * s2 + w2 * c1 * c2);
  const double xdd = A * (-(w1 * w1 + w2 * w2) * c1 * c2 + 2.0 * w1 * w2 * s1 * s2);
  const double ydd = A * (-(w1 * w1 + w2 * w2) * c1 * s2 - 2.0 * w1 * w2 * s1 * c2);
  const double sp2 = ref.x_dot_d * ref.x_dot_d + ref.y_dot_d * ref.y_dot_d;
  ref.v_t = std::sqrt(sp2);
  ref.theta_d = std::atan2(ref.y_dot_d, ref.x_dot_d);
  ref.omega_d = sp2 > 0.0 ? (ref.x_dot_d * ydd - ref.y_dot_d * xdd) / sp2 : 0.0;
  return ref;
}

PoseRef lissajous_ref(double t, const LissajousParams& lp) {
  PoseRef ref;
  ref.x_d = lp.ax * std::cos(lp.wx * t + lp.phase_x);
  ref.y_d = lp.ay * std::sin(lp.wy * t + lp.phase_y);
  ref.x_dot_d = -lp.ax * lp.wx * std::sin(lp.wx * t + lp.phase_x);
  ref.y_dot_d = lp.ay * lp.wy * std::cos(lp.wy * t + lp.phase_y);
  ref.v_t = std::hypot(ref.x_dot_d, ref.y_dot_d);
  ref.theta_d = lp.theta;
  ref.omega_d = 0.0;
  return ref;
}

namespace {

// Value and first derivative of a 1-D interpolant through (ts, ys).
struct Interp {
  double value, slope;
};

// Natural cubic spline second derivatives (tridiagonal solve).
std::vector<double> spline_moments(const std::vector<double>& ts, const std::vector<double>& ys) {
  const std::size_t n = ts.size();
  std::vector<double> M(n, 0.0);
  if (n < 3) return M;
  std::vector<double> diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0), lower(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = ts[i] - ts[i - 1], h1 = ts[i + 1] - ts[i];
    lower[i] = h0 / 6.0;
    diag[i] = (h0 + h1) / 3.0;
    upper[i] = h1 / 6.0;
    rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
  }
  // Thomas algorithm; rows 0 and n-1 are the natural end conditions M = 0.
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  M[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) M[i] = (rhs[i] - upper[i] * M[i + 1]) / diag[i];
  return M;
}

Interp interpolate(const std::vector<double>& ts, const std::vector<double>& ys,
                   const std::vector<double>& M, double t, int order) {
  const std::size_t n = ts.size();
  if (n == 1) return {ys[0], 0.0};
  t = std::clamp(t, ts.front(), ts.back());
  std::size_t i = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
  i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
  const double h = ts[i + 1] - ts[i];
  const double u = (t - ts[i]) / h;
  if (order == 1 || n < 3) return {ys[i] + u * (ys[i + 1] - ys[i]), (ys[i + 1] - ys[i]) / h};
  const double A = 1.0 - u, B = u;
  const double value = A * ys[i] + B * ys[i + 1] +
                       ((A * A * A - A) * M[i] + (B * B * B - B) * M[i + 1]) * h * h / 6.0;
  const double slope = (ys[i + 1] - ys[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * M[i] +
                       (3.0 * B * B - 1.0) / 6.0 * h * M[i + 1];
  return {value, slope};
}

}  // namespace

PoseRef sampled_ref(double t, const std::vector<PoseSample>& samples, int order) {
  std::vector<double> ts, xs, ys, th;
  ts.reserve(samples.size());
  for (const auto& s : samples) {
    ts.push_back(s.t);
    xs.push_back(s.x);
    ys.push_back(s.y);
    th.push_back(th.empty() ? s.theta : unwrap_near(th.back(), s.theta));
  }
  const auto X = interpolate(ts, xs, spline_moments(ts, xs), t, order);
  const auto Y = interpolate(ts, ys, spline_moments(ts, ys), t, order);
  const auto H = interpolate(ts, th, spline_moments(ts, th), t, order);
  PoseRef ref;
  ref.x_d = X.value;
  ref.y_d = Y.value;
  ref.x_dot_d = X.slope;
  ref.y_dot_d = Y.slope;
  ref.v_t = std::hypot(X.slope, Y.slope);
  ref.theta_d = H.value;
  ref.omega_d = H.slope;
  return ref;
}

PoseRef TrajectorySpec::at(double t) const {
  switch (kind) {
    case TrajectoryKind::flower: return flower_ref(t, flower);
    case TrajectoryKind::lissajous: return lissajous_ref(t, lissajous);
    case TrajectoryKind::samples: return sampled_ref(t, samples, interpolation_order);
  }
  return {};
}

void TrajectorySpec::validate() const {
  if (kind == TrajectoryKind::flower) {
    if (!(flower.petal_period > 0 && flower.sweep_period > 0))
      throw InvalidInput("trajectory.flower periods must be positive");
  }
  if (kind == TrajectoryKind::samples) {
    if (samples.empty()) throw InvalidInput("trajectory.samples must not be empty");
    for (std::size_t i = 1; i < samples.size(); ++i)
      if (!(samples[i].t > samples[i - 1].t))
        throw InvalidInput("trajectory.samples times must be strictly increasing");
    if (interpolation_order != 1 && interpolation_order != 3)
      throw InvalidInput("trajectory.interpolation_order must be 1 or 3");
  }
}

}  // namespace fwis
