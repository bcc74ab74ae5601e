#pragma once

#include "fwis/analysis.hpp"
#include "fwis/bounds.hpp"
#include "fwis/dyncontrol.hpp"
#include "fwis/kincontrol.hpp"
#include "fwis/sim.hpp"
#include "fwis/trajectory.hpp"
#include "fwis/uncertainty.hpp"

#include "json.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwis {

using json = nlohmann::json;

// Schema or parse problem; the message starts with the offending JSON path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnalysisSettings {
  double epsilon = 1e-3;
  bool coriolis_substitution = false;  // b_c in place of L_C2 in the residual coefficients
  AnalysisOptions checks;
};

struct ExperimentConfig {
  std::string name = "custom";
  RobotParams robot;
  EnvelopeSpec envelope;
  KinGains kin_gains;
  PIGains pi_gains;
  TrajectorySpec trajectory;
  UncertaintyModel disturbance;
  SimConfig sim;
  AnalysisSettings analysis;
  std::vector<std::uint64_t> seeds{1};

  BoundSet bounds() const;
  GainCertificate certificate() const;
  std::vector<std::string> validate() const;  // throws on errors, returns warnings
};

// A config may name a preset under "preset" and override any subset of it.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

// Set a dotted path such as "pi_gains.kp.0" or "sim.dt" to a number.
ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& dotted_path, double value);

}  // namespace fwis
