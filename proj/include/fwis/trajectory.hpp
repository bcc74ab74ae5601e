#pragma once

#include "fwis/kincontrol.hpp"

#include <string>
#include <vector>

namespace fwis {

enum class TrajectoryKind { flower, lissajous, samples };

std::string to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(const std::string& name);

struct FlowerParams {
  double amplitude = 0.5;
  double petal_period = 35.0;  // s, radial modulation
  double sweep_period = 70.0;  // s, angular sweep
  double cx = 0.1, cy = 0.2;
};

struct LissajousParams {
  double ax = 0.75, wx = 0.1, phase_x = -1.5707963267948966 + 0.75;
  double ay = -0.5, wy = 0.2, phase_y = -3.141592653589793;
  double theta = 0.0;  // fixed heading
};

struct PoseSample {
  double t = 0, x = 0, y = 0, theta = 0;
};

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::flower;
  FlowerParams flower;
  LissajousParams lissajous;
  std::vector<PoseSample> samples;
  int interpolation_order = 3;  // 1 = linear, 3 = natural cubic spline

  PoseRef at(double t) const;
  void validate() const;
};

PoseRef flower_ref(double t, const FlowerParams& fp = {});
PoseRef lissajous_ref(double t, const LissajousParams& lp = {});
PoseRef sampled_ref(double t, const std::vector<PoseSample>& samples, int order);

}  // namespace fwis
