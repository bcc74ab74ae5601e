// Thin Python surface over the core library. Configs and reports cross the
// boundary as JSON text; traces come back as a dict of numpy columns.
#include "fwis/analysis.hpp"
#include "fwis/config.hpp"
#include "fwis/fixtures.hpp"
#include "fwis/io.hpp"
#include "fwis/model.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace fwis;

namespace {

ExperimentConfig cfg_of(const std::string& config_json) { return parse_config(config_json); }

py::dict trace_columns(const SimTrace& tr) {
  const std::size_t n = tr.rows.size();
  std::vector<py::array_t<double>> cols;
  for (std::size_t c = 0; c < kTraceColumns.size(); ++c) cols.emplace_back(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = trace_row_values(tr.rows[k]);
    for (std::size_t c = 0; c < v.size(); ++c) cols[c].mutable_at(k) = v[c];
  }
  py::dict out;
  for (std::size_t c = 0; c < kTraceColumns.size(); ++c) out[kTraceColumns[c]] = cols[c];
  return out;
}

SimTrace run_cfg(const ExperimentConfig& c) {
  return run(c.sim, c.trajectory, c.kin_gains, c.pi_gains, c.disturbance, c.robot);
}

std::string analyze_trace(const ExperimentConfig& c, const SimTrace& tr) {
  const auto rep = analyze(tr, c.pi_gains, c.disturbance, c.robot, c.bounds(), c.certificate(), c.analysis.checks);
  return report_to_json(rep).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "four-wheel independent steering robot: model, certificate, simulation, analysis";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TraceParseError>(m, "TraceParseError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return config_to_json(preset(name)).dump(); });
  m.def("normalize_config", [](const std::string& j) { return config_to_json(cfg_of(j)).dump(); },
        "parse a config (presets and overrides resolved) and return the full JSON");
  m.def("with_parameter", [](const std::string& j, const std::string& path, double value) {
    return config_to_json(with_parameter(cfg_of(j), path, value)).dump();
  });

  m.def("certify", [](const std::string& j) {
    const ExperimentConfig c = cfg_of(j);
    const BoundSet b = c.bounds();
    return certificate_to_json(c, b, certify(b, c.pi_gains, c.analysis.epsilon)).dump();
  });

  m.def("simulate", [](const std::string& j) {
    const ExperimentConfig c = cfg_of(j);
    SimTrace tr;
    {
      py::gil_scoped_release release;
      tr = run_cfg(c);
    }
    return trace_columns(tr);
  });

  m.def("simulate_csv", [](const std::string& j) {
    const SimTrace tr = run_cfg(cfg_of(j));
    std::ostringstream os;
    write_trace_csv(tr, os);
    return os.str();
  });

  m.def("analyze_csv", [](const std::string& j, const std::string& csv) {
    std::istringstream in(csv);
    return analyze_trace(cfg_of(j), read_trace_csv(in));
  });

  m.def("run_and_analyze", [](const std::string& j) {
    const ExperimentConfig c = cfg_of(j);
    py::gil_scoped_release release;
    return analyze_trace(c, run_cfg(c));
  }, "simulate and analyze in one go, using the in-memory controller state");

  m.def("fixture_quantity", [](const std::string& j, const std::string& q) { return fixture_quantity(cfg_of(j), q); });
  m.def("validate_fixtures", [](const std::string& dir) {
    const auto rep = validate_fixtures(dir);
    std::vector<std::string> failures;
    for (const auto& c : rep.checks)
      if (!c.pass) failures.push_back(c.message);
    return py::make_tuple(rep.pass, rep.checks.size(), failures);
  });

  // Model evaluations at the default robot parameters; q = (x, y, theta, phi, delta_f, delta_r).
  m.def("jacobian", [](const Vec6& q) { return Eigen::MatrixXd(jacobian(ConfigState::from(q), RobotParams{})); });
  m.def("m_tilde", [](const Vec6& q) { return Mat3(m_tilde(ConfigState::from(q), RobotParams{})); });
  m.def("c_tilde", [](const Vec6& q, double ddf, double ddr) {
    return Mat3(c_tilde(ConfigState::from(q), ddf, ddr, RobotParams{}));
  });
  m.def("b_tilde", [](const Vec6& q) { return Mat3(b_tilde(ConfigState::from(q), RobotParams{})); });

  m.attr("TRACE_COLUMNS") = std::vector<std::string>(kTraceColumns.begin(), kTraceColumns.end());
}
