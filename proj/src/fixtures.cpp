#include "fwis/fixtures.hpp"

#include "fwis/bounds.hpp"
#include "fwis/io.hpp"
#include "fwis/model.hpp"
#include "fwis/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fwis {

namespace {

std::vector<double> parse_args(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

void need(const std::string& q, const std::vector<double>& args, std::size_t n) {
  if (args.size() != n)
    throw ConfigError("fixture quantity '" + q + "' expects " + std::to_string(n) + " arguments");
}

double pose_component(const PoseRef& r, int c) {
  switch (c) {
    case 0: return r.x_d;
    case 1: return r.y_d;
    case 2: return r.theta_d;
    case 3: return r.v_t;
    case 4: return r.omega_d;
  }
  throw ConfigError("pose component index must be 0..4");
}

bool close(double actual, double expected, double tol_rel, double tol_abs) {
  return std::abs(actual - expected) <= std::max(tol_abs, tol_rel * std::abs(expected));
}

}  // namespace

double fixture_quantity(const ExperimentConfig& cfg, const std::string& quantity) {
  const auto at = quantity.find('@');
  const std::string name = quantity.substr(0, at);
  const std::vector<double> args = at == std::string::npos ? std::vector<double>{} : parse_args(quantity.substr(at + 1));
  const RobotParams& p = cfg.robot;

  const BoundSet b = cfg.bounds();
  const std::map<std::string, double> constants = {
      {"a1", b.a1},         {"a2", b.a2},         {"b_c", b.b_c},       {"sigma_J", b.sigma_J},
      {"sigma_dJ", b.sigma_dJ}, {"L_M", b.L_M},   {"L_C1", b.L_C1},     {"L_C2", b.L_C2},
      {"c_tilde", b.c_tilde}, {"d_tilde", b.d_tilde}, {"d_v", b.d_v},   {"A_q", b.A_q},
      {"A_v", b.A_v},       {"A_c", b.A_c},       {"V_d", b.V_d},       {"A_d", b.A_d},
      {"A", p.A()},         {"I_recomputed", p.recomputed_I()}};
  if (auto it = constants.find(name); it != constants.end()) return it->second;

  if (name == "threshold" || name == "mu" || name == "mu_limit" || name == "pass" ||
      name == "lambda_min_Kp" || name == "l2_gain_bound") {
    const GainCertificate c = certify(b, cfg.pi_gains, cfg.analysis.epsilon);
    if (name == "threshold") return c.threshold;
    if (name == "mu") return c.mu;
    if (name == "mu_limit") return c.mu_limit;
    if (name == "pass") return c.pass ? 1.0 : 0.0;
    if (name == "lambda_min_Kp") return c.lambda_min_Kp;
    return c.l2_gain_bound;
  }
  if (name == "sigma_J_sampled") return jacobian_gain(p, cfg.envelope, GainMode::sampled, 10000, cfg.seeds.at(0));
  if (name == "mass_matrix") {
    need(quantity, args, 1);
    const int i = static_cast<int>(args[0]);
    return mass_matrix_full(p)(i, i);
  }
  if (name == "m_tilde_11") {
    need(quantity, args, 2);
    return m_tilde_11(args[0], args[1], p);
  }
  if (name == "b_tilde_11") {
    need(quantity, args, 2);
    return b_tilde_11(args[0], args[1], p);
  }
  if (name == "c_tilde_11") {
    need(quantity, args, 4);
    return c_tilde_11(args[0], args[1], args[2], args[3], p);
  }
  if (name == "jacobian") {
    need(quantity, args, 5);
    const Mat63 J = jacobian(ConfigState{0, 0, args[0], 0, args[1], args[2]}, p);
    return J(static_cast<int>(args[3]), static_cast<int>(args[4]));
  }
  if (name == "flower") {
    need(quantity, args, 2);
    return pose_component(flower_ref(args[0], cfg.trajectory.flower), static_cast<int>(args[1]));
  }
  if (name == "lissajous") {
    need(quantity, args, 2);
    return pose_component(lissajous_ref(args[0], cfg.trajectory.lissajous), static_cast<int>(args[1]));
  }
  throw ConfigError("unknown fixture quantity '" + quantity + "'");
}

FixtureReport validate_fixture(const json& fx, const std::string& base_dir) {
  FixtureReport rep;
  const std::string fname = fx.value("name", std::string("<unnamed>"));
  const ExperimentConfig cfg = config_from_json(fx.value("config", json::object()));

  for (const auto& v : fx.value("values", json::array())) {
    FixtureCheck c;
    c.fixture = fname;
    c.quantity = v.at("quantity").get<std::string>();
    c.source = v.value("source", std::string());
    c.expected = v.at("expected").get<double>();
    c.tol_rel = v.value("tol_rel", 0.0);
    c.tol_abs = v.value("tol_abs", 0.0);
    try {
      if (c.source != "reported" && c.source != "computed" && c.source != "identity")
        throw ConfigError("value needs a source of reported, computed or identity");
      c.actual = fixture_quantity(cfg, c.quantity);
      c.pass = close(c.actual, c.expected, c.tol_rel, c.tol_abs);
    } catch (const std::exception& e) {
      c.pass = false;
      c.message = fname + ": " + c.quantity + ": " + e.what();
    }
    if (!c.pass && c.message.empty()) {
      std::ostringstream os;
      os.precision(10);
      os << fname << ": " << c.quantity << " expected " << c.expected << " got " << c.actual;
      c.message = os.str();
    }
    rep.pass = rep.pass && c.pass;
    rep.checks.push_back(c);
  }

  if (fx.contains("trace")) {
    const json& tr = fx.at("trace");
    const std::string file = (std::filesystem::path(base_dir) / tr.at("file").get<std::string>()).string();
    FixtureCheck c;
    c.fixture = fname;
    c.quantity = "trace:" + tr.at("file").get<std::string>();
    c.source = "computed";
    c.tol_rel = tr.value("tol_rel", 1e-9);
    c.tol_abs = tr.value("tol_abs", 1e-12);
    try {
      const SimTrace golden = read_trace_csv(file);
      const SimTrace fresh = run(cfg.sim, cfg.trajectory, cfg.kin_gains, cfg.pi_gains, cfg.disturbance, cfg.robot);
      if (golden.rows.size() != fresh.rows.size()) {
        c.message = fname + ": golden trace has " + std::to_string(golden.rows.size()) + " rows, run produced " +
                    std::to_string(fresh.rows.size());
      } else {
        double worst = 0;
        std::string where;
        for (std::size_t k = 0; k < golden.rows.size(); ++k) {
          const auto g = trace_row_values(golden.rows[k]);
          const auto a = trace_row_values(fresh.rows[k]);
          for (std::size_t col = 0; col < g.size(); ++col) {
            const double err = std::abs(a[col] - g[col]);
            if (!close(a[col], g[col], c.tol_rel, c.tol_abs) && err > worst) {
              worst = err;
              where = "row " + std::to_string(k) + ", column " + kTraceColumns[col];
            }
          }
        }
        c.pass = where.empty();
        c.actual = worst;
        if (!c.pass) c.message = fname + ": golden trace mismatch at " + where;
      }
    } catch (const std::exception& e) {
      c.message = fname + ": " + e.what();
    }
    rep.pass = rep.pass && c.pass;
    rep.checks.push_back(c);
  }
  return rep;
}

FixtureReport validate_fixtures(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError(dir + ": fixture directory not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  FixtureReport all;
  for (const auto& f : files) {
    std::ifstream in(f);
    json fx;
    try {
      fx = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(f.string() + ": malformed JSON: " + e.what());
    }
    if (!fx.contains("values") && !fx.contains("trace")) continue;  // preset configs live here too
    FixtureReport one = validate_fixture(fx, dir);
    all.pass = all.pass && one.pass;
    all.checks.insert(all.checks.end(), one.checks.begin(), one.checks.end());
  }
  return all;
}

}  // namespace fwis
