#include "fwis/config.hpp"
#include "fwis/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace fwis;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

SimTrace short_trace() {
  ExperimentConfig c = preset("table1-wall-lissajous");
  c.sim.T = 0.05;
  return run(c.sim, c.trajectory, c.kin_gains, c.pi_gains, c.disturbance, c.robot);
}

std::string csv_of(const SimTrace& tr) {
  std::stringstream ss;
  write_trace_csv(tr, ss);
  return ss.str();
}

std::string parse_error(const std::string& csv) {
  std::stringstream ss(csv);
  try {
    read_trace_csv(ss);
  } catch (const TraceParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, PresetsCertify) {
  for (const auto& name : preset_names()) {
    const ExperimentConfig c = preset(name);
    EXPECT_EQ(c.name, name);
    EXPECT_TRUE(c.certificate().pass) << name;
    EXPECT_NEAR(c.certificate().threshold, 1.538804813067076, 1e-12) << name;
  }
  EXPECT_THROW(preset("moon"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = preset("table1-wall-lissajous");
  c.pi_gains.tau_limit = Vec3(1, 2, 3);
  c.seeds = {4, 5};
  c.trajectory.samples = {{0, 0, 0, 0}, {1, 1, 0, 0.2}};
  const json j = config_to_json(c);
  const ExperimentConfig back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.disturbance.parts.size(), 2u);
  EXPECT_EQ(*back.pi_gains.tau_limit, Vec3(1, 2, 3));
}

TEST(Config, PresetWithOverrides) {
  const auto c = parse_config(R"({"preset": "table1-floor-flower", "pi_gains": {"kp": [1.0, 2.344, 2.344]}, "sim": {"T": 2}})");
  EXPECT_EQ(c.pi_gains.kp[0], 1.0);
  EXPECT_EQ(c.sim.T, 2.0);
  EXPECT_EQ(c.sim.dt, 1e-3);
  EXPECT_FALSE(c.certificate().pass);
}

TEST(Config, ErrorsNameTheOffendingPath) {
  EXPECT_NE(error_of(R"({"sim": {"stepsize": 1}})").find("sim.stepsize: unknown key"), std::string::npos);
  EXPECT_NE(error_of(R"({"pi_gains": {"kp": [1, 2]}})").find("pi_gains.kp"), std::string::npos);
  EXPECT_NE(error_of(R"({"robot": {"m": "heavy"}})").find("robot.m: expected a number"), std::string::npos);
  EXPECT_NE(error_of(R"({"disturbance": {"kind": "wind"}})").find("disturbance.kind"), std::string::npos);
  EXPECT_NE(error_of(R"({"sim": {"dt": 0.001,}})").find("malformed JSON"), std::string::npos);
  EXPECT_NE(error_of("[1, 2]").find("expected an object"), std::string::npos);
}

TEST(Config, ValidateReportsWarningsAndErrors) {
  ExperimentConfig c = preset("table1-floor-flower");
  const auto w = c.validate();
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("robot.I"), std::string::npos);
  c.analysis.epsilon = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset("table1-floor-flower");
  c.pi_gains.kp[2] = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, WithParameter) {
  const ExperimentConfig c = preset("table1-floor-flower");
  EXPECT_EQ(with_parameter(c, "pi_gains.kp.0", 3.0).pi_gains.kp[0], 3.0);
  EXPECT_EQ(with_parameter(c, "sim.dt", 5e-4).sim.dt, 5e-4);
  EXPECT_EQ(with_parameter(c, "sim.record_stride", 4).sim.record_stride, 4);
  EXPECT_EQ(with_parameter(c, "disturbance.b_f", 0.01).disturbance.b_f, 0.01);
  EXPECT_THROW(with_parameter(c, "pi_gains.kp.7", 1), ConfigError);
  EXPECT_THROW(with_parameter(c, "nothing.here", 1), ConfigError);
  EXPECT_THROW(with_parameter(c, "trajectory.kind", 1), ConfigError);
  EXPECT_THROW(with_parameter(c, "", 1), ConfigError);
}

TEST(TraceIo, CsvRoundTripIsLossless) {
  const SimTrace tr = short_trace();
  const std::string text = csv_of(tr);
  std::stringstream ss(text);
  const SimTrace back = read_trace_csv(ss);
  ASSERT_EQ(back.rows.size(), tr.rows.size());
  for (std::size_t k = 0; k < tr.rows.size(); ++k)
    EXPECT_EQ(trace_row_values(back.rows[k]), trace_row_values(tr.rows[k])) << k;
  EXPECT_EQ(csv_of(back), text);
  EXPECT_DOUBLE_EQ(back.dt, 1e-3);
}

TEST(TraceIo, HeaderListsEveryColumn) {
  const std::string text = csv_of(short_trace());
  const std::string header = text.substr(0, text.find('\n'));
  EXPECT_EQ(header.rfind("t,x,y,theta", 0), 0u);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 28);
}

TEST(TraceIo, MalformedTracesAreRejected) {
  const std::string text = csv_of(short_trace());
  // Cut in the middle of the third data row.
  const std::size_t cut = text.find('\n', text.find('\n', text.find('\n') + 1) + 1) + 20;
  EXPECT_NE(parse_error(text.substr(0, cut)).find("truncated row"), std::string::npos);
  EXPECT_NE(parse_error("").find("empty trace"), std::string::npos);
  EXPECT_NE(parse_error("a,b\n").find("unexpected header"), std::string::npos);

  const std::string header = text.substr(0, text.find('\n') + 1);
  std::string row = text.substr(header.size(), text.find('\n', header.size()) - header.size());
  const std::string bad_sat = row.substr(0, row.rfind(',')) + ",64\n";
  EXPECT_NE(parse_error(header + bad_sat).find("column sat"), std::string::npos);
  const std::string frac_sat = row.substr(0, row.rfind(',')) + ",1.5\n";
  EXPECT_NE(parse_error(header + frac_sat).find("column sat"), std::string::npos);
  const std::string short_row = row.substr(0, row.rfind(',')) + "\n";
  EXPECT_NE(parse_error(header + short_row).find("expected 29 fields"), std::string::npos);
  std::string nan_row = row;
  nan_row.replace(nan_row.find(',') + 1, 0, "x");
  EXPECT_NE(parse_error(header + nan_row + "\n").find("column x: not a number"), std::string::npos);
}

TEST(TraceIo, ReportJson) {
  const ExperimentConfig c = preset("table1-floor-flower");
  const json cert = certificate_to_json(c, c.bounds(), c.certificate());
  EXPECT_TRUE(cert.dump().find("sigma_J") != std::string::npos);
  const json b = bounds_to_json(c.bounds());
  EXPECT_NEAR(b.at("L_C2").get<double>(), 1.7472521265986112, 1e-15);
}

TEST(Config, ShippedPresetFilesMatchBuiltIns) {
  for (const auto& name : preset_names()) {
    const ExperimentConfig file = load_config(std::string(FWIS_PRESET_DIR) + "/" + name + ".json");
    EXPECT_EQ(config_to_json(file), config_to_json(preset(name))) << name;
  }
}
