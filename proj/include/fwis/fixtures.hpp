#pragma once

#include "fwis/config.hpp"

#include <string>
#include <vector>

namespace fwis {

struct FixtureCheck {
  std::string fixture;
  std::string quantity;
  std::string source;  // reported | computed | identity
  double expected = 0, actual = 0;
  double tol_rel = 0, tol_abs = 0;
  bool pass = false;
  std::string message;
};

struct FixtureReport {
  std::vector<FixtureCheck> checks;
  bool pass = true;
};

// Value of a named quantity for the given experiment ("sigma_J", "A_v",
// "threshold", "mass_matrix@3", "m_tilde_11@0,0", ...). Throws on unknown names.
double fixture_quantity(const ExperimentConfig& cfg, const std::string& quantity);

// Recompute every value of one fixture JSON document. `base_dir` resolves
// relative trace file names.
FixtureReport validate_fixture(const json& fixture, const std::string& base_dir);

// All *.json fixtures in `dir` (sorted by name).
FixtureReport validate_fixtures(const std::string& dir);

}  // namespace fwis
