#include "fwis/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>

namespace fwis {

namespace {

// Typed access to one JSON object with path-qualified errors.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) throw ConfigError(at(it.key()) + ": unknown key");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void num(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    out = v.get<double>();
  }

  void integer(const char* key, int& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    out = v.get<int>();
  }

  void boolean(const char* key, bool& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key) + ": expected true or false");
    out = v.get<bool>();
  }

  void str(const char* key, std::string& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    out = v.get<std::string>();
  }

  template <int N>
  void vec(const char* key, Eigen::Matrix<double, N, 1>& out) const {
    if (!has(key)) return;
    out = vec_of<N>(j_.at(key), at(key));
  }

  template <int N>
  static Eigen::Matrix<double, N, 1> vec_of(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N))
      throw ConfigError(where + ": expected an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  Node child(const char* key) const { return Node(j_.at(key), at(key)); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError((path_.empty() ? "<root>" : path_) + ": " + msg); }

 private:
  const json& j_;
  std::string path_;
};

template <class F>
void wrap_invalid(const std::string& path, F&& f) {
  try {
    f();
  } catch (const InvalidInput& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RobotParams parse_robot(const Node& n) {
  n.allow({"r", "a", "b", "m", "m_w", "I_theta", "I_phi", "I_delta", "I"});
  RobotParams p;
  n.num("r", p.r);
  n.num("a", p.a);
  n.num("b", p.b);
  n.num("m", p.m);
  n.num("m_w", p.m_w);
  n.num("I_theta", p.I_theta);
  n.num("I_phi", p.I_phi);
  n.num("I_delta", p.I_delta);
  n.num("I", p.I);
  return p;
}

EnvelopeSpec parse_envelope(const Node& n) {
  n.allow({"delta_range", "delta_dot_max", "v_w_max", "A_d", "V_d", "norm"});
  EnvelopeSpec e;
  if (n.has("delta_range")) {
    const auto r = Node::vec_of<2>(n.raw("delta_range"), n.at("delta_range"));
    e.delta_lo = r[0];
    e.delta_hi = r[1];
  }
  n.num("delta_dot_max", e.delta_dot_max);
  n.num("v_w_max", e.v_w_max);
  n.num("A_d", e.A_d);
  n.num("V_d", e.V_d_override);
  std::string norm = "weighted";
  n.str("norm", norm);
  if (norm == "weighted") e.norm = VelocityNorm::weighted;
  else if (norm == "euclidean") e.norm = VelocityNorm::euclidean;
  else throw ConfigError(n.at("norm") + ": expected \"weighted\" or \"euclidean\"");
  return e;
}

KinGains parse_kin(const Node& n) {
  n.allow({"k_x", "k_y", "k_theta", "k_delta", "eps_v", "delta_max", "delta_dot_max", "tau_ff"});
  KinGains g;
  n.num("k_x", g.k_x);
  n.num("k_y", g.k_y);
  n.num("k_theta", g.k_theta);
  n.num("k_delta", g.k_delta);
  n.num("eps_v", g.eps_v);
  n.num("delta_max", g.delta_max);
  n.num("delta_dot_max", g.delta_dot_max);
  n.num("tau_ff", g.tau_ff);
  return g;
}

PIGains parse_pi(const Node& n) {
  n.allow({"kp", "ki", "K_t", "eta_limit", "tau_limit"});
  PIGains g;
  n.vec<3>("kp", g.kp);
  n.vec<3>("ki", g.ki);
  n.num("K_t", g.K_t);
  n.vec<3>("eta_limit", g.eta_limit);
  if (n.has("tau_limit")) {
    Vec3 lim;
    n.vec<3>("tau_limit", lim);
    g.tau_limit = lim;
  }
  return g;
}

TrajectorySpec parse_trajectory(const Node& n) {
  n.allow({"kind", "flower", "lissajous", "samples", "interpolation_order"});
  TrajectorySpec t;
  std::string kind = "flower";
  n.str("kind", kind);
  wrap_invalid(n.at("kind"), [&] { t.kind = trajectory_kind_from_string(kind); });
  if (n.has("flower")) {
    const Node f = n.child("flower");
    f.allow({"amplitude", "petal_period", "sweep_period", "cx", "cy"});
    f.num("amplitude", t.flower.amplitude);
    f.num("petal_period", t.flower.petal_period);
    f.num("sweep_period", t.flower.sweep_period);
    f.num("cx", t.flower.cx);
    f.num("cy", t.flower.cy);
  }
  if (n.has("lissajous")) {
    const Node l = n.child("lissajous");
    l.allow({"ax", "wx", "phase_x", "ay", "wy", "phase_y", "theta"});
    l.num("ax", t.lissajous.ax);
    l.num("wx", t.lissajous.wx);
    l.num("phase_x", t.lissajous.phase_x);
    l.num("ay", t.lissajous.ay);
    l.num("wy", t.lissajous.wy);
    l.num("phase_y", t.lissajous.phase_y);
    l.num("theta", t.lissajous.theta);
  }
  if (n.has("samples")) {
    const json& arr = n.raw("samples");
    if (!arr.is_array()) throw ConfigError(n.at("samples") + ": expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Node s(arr[i], n.at("samples") + "[" + std::to_string(i) + "]");
      s.allow({"t", "x", "y", "theta"});
      PoseSample ps;
      s.num("t", ps.t);
      s.num("x", ps.x);
      s.num("y", ps.y);
      s.num("theta", ps.theta);
      t.samples.push_back(ps);
    }
  }
  n.integer("interpolation_order", t.interpolation_order);
  return t;
}

UncertaintyModel parse_disturbance(const Node& n, double robot_mass) {
  n.allow({"kind", "b_f", "viscous_steering", "bias", "g", "direction", "mass", "pulses", "parts",
           "declared"});
  UncertaintyModel m;
  std::string kind = "none";
  n.str("kind", kind);
  wrap_invalid(n.at("kind"), [&] { m.kind = disturbance_kind_from_string(kind); });
  n.num("b_f", m.b_f);
  n.boolean("viscous_steering", m.viscous_steering);
  n.vec<6>("bias", m.bias);
  n.num("g", m.g);
  n.num("direction", m.direction);
  m.mass = robot_mass;
  n.num("mass", m.mass);
  if (n.has("pulses")) {
    const json& arr = n.raw("pulses");
    if (!arr.is_array()) throw ConfigError(n.at("pulses") + ": expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Node s(arr[i], n.at("pulses") + "[" + std::to_string(i) + "]");
      s.allow({"t_start", "t_end", "force"});
      Pulse p;
      s.num("t_start", p.t_start);
      s.num("t_end", p.t_end);
      s.vec<6>("force", p.force);
      if (!(p.t_end >= p.t_start && p.t_start >= 0))
        throw ConfigError(s.at("t_end") + ": pulse window must satisfy 0 <= t_start <= t_end");
      m.pulses.push_back(p);
    }
  }
  if (n.has("parts")) {
    const json& arr = n.raw("parts");
    if (!arr.is_array()) throw ConfigError(n.at("parts") + ": expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      m.parts.push_back(parse_disturbance(Node(arr[i], n.at("parts") + "[" + std::to_string(i) + "]"), robot_mass));
  }
  if (n.has("declared")) {
    const Node d = n.child("declared");
    d.allow({"c", "d", "L_f1", "L_f2"});
    if (d.has("c")) m.declared_c = Node::vec_of<6>(d.raw("c"), d.at("c"));
    if (d.has("d")) m.declared_d = Node::vec_of<6>(d.raw("d"), d.at("d"));
    if (d.has("L_f1")) {
      double v = 0;
      d.num("L_f1", v);
      m.declared_L_f1 = v;
    }
    if (d.has("L_f2")) {
      double v = 0;
      d.num("L_f2", v);
      m.declared_L_f2 = v;
    }
    const auto b = m.bounds();
    if ((b.c.array() < 0).any() || (b.d.array() < 0).any() || b.L_f1 < 0 || b.L_f2 < 0)
      throw ConfigError(n.at("declared") + ": declared bounds must be non-negative");
  }
  return m;
}

SimConfig parse_sim(const Node& n) {
  n.allow({"dt", "T", "integrator", "control", "record_stride", "initial", "q0", "v0", "divergence_limit"});
  SimConfig s;
  n.num("dt", s.dt);
  n.num("T", s.T);
  std::string integ = to_string(s.integrator), control = to_string(s.control), init = to_string(s.initial);
  n.str("integrator", integ);
  n.str("control", control);
  n.str("initial", init);
  wrap_invalid(n.at("integrator"), [&] { s.integrator = integrator_from_string(integ); });
  wrap_invalid(n.at("control"), [&] { s.control = control_mode_from_string(control); });
  wrap_invalid(n.at("initial"), [&] { s.initial = initial_mode_from_string(init); });
  n.integer("record_stride", s.record_stride);
  if (n.has("q0")) s.q0 = ConfigState::from(Node::vec_of<6>(n.raw("q0"), n.at("q0")));
  if (n.has("v0")) s.v0 = BodyVelocity::from(Node::vec_of<3>(n.raw("v0"), n.at("v0")));
  n.num("divergence_limit", s.divergence_limit);
  return s;
}

AnalysisSettings parse_analysis(const Node& n) {
  n.allow({"epsilon", "coriolis_substitution", "transient", "passivity_rel_tol", "checks"});
  AnalysisSettings a;
  n.num("epsilon", a.epsilon);
  n.boolean("coriolis_substitution", a.coriolis_substitution);
  n.num("transient", a.checks.transient);
  n.num("passivity_rel_tol", a.checks.passivity_rel_tol);
  if (n.has("checks")) {
    const Node c = n.child("checks");
    c.allow({"passivity", "lyapunov", "l2", "residual", "storage"});
    c.boolean("passivity", a.checks.passivity);
    c.boolean("lyapunov", a.checks.lyapunov);
    c.boolean("l2", a.checks.l2);
    c.boolean("residual", a.checks.residual);
    c.boolean("storage", a.checks.storage);
  }
  return a;
}

json vec_json(const auto& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json disturbance_json(const UncertaintyModel& m) {
  json j = {{"kind", to_string(m.kind)}};
  switch (m.kind) {
    case DisturbanceKind::none: break;
    case DisturbanceKind::viscous:
      j["b_f"] = m.b_f;
      j["viscous_steering"] = m.viscous_steering;
      break;
    case DisturbanceKind::constant_bias: j["bias"] = vec_json(m.bias); break;
    case DisturbanceKind::gravity_plane:
      j["g"] = m.g;
      j["direction"] = m.direction;
      j["mass"] = m.mass;
      break;
    case DisturbanceKind::thruster_pulse: {
      json arr = json::array();
      for (const auto& p : m.pulses)
        arr.push_back({{"t_start", p.t_start}, {"t_end", p.t_end}, {"force", vec_json(p.force)}});
      j["pulses"] = arr;
      break;
    }
    case DisturbanceKind::composite: {
      json arr = json::array();
      for (const auto& p : m.parts) arr.push_back(disturbance_json(p));
      j["parts"] = arr;
      break;
    }
  }
  json declared = json::object();
  if (m.declared_c) declared["c"] = vec_json(*m.declared_c);
  if (m.declared_d) declared["d"] = vec_json(*m.declared_d);
  if (m.declared_L_f1) declared["L_f1"] = *m.declared_L_f1;
  if (m.declared_L_f2) declared["L_f2"] = *m.declared_L_f2;
  if (!declared.empty()) j["declared"] = declared;
  return j;
}

}  // namespace

BoundSet ExperimentConfig::bounds() const {
  return compute_bounds(robot, envelope, disturbance.bounds(), BoundOptions{analysis.coriolis_substitution});
}

GainCertificate ExperimentConfig::certificate() const {
  return certify(bounds(), pi_gains, analysis.epsilon);
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> warnings;
  wrap_invalid("robot", [&] { warnings = robot.validate(); });
  wrap_invalid("envelope", [&] { envelope.validate(); });
  wrap_invalid("kin_gains", [&] { kin_gains.validate(); });
  wrap_invalid("pi_gains", [&] { pi_gains.validate(); });
  wrap_invalid("trajectory", [&] { trajectory.validate(); });
  wrap_invalid("sim", [&] { sim.validate(); });
  if (!(analysis.epsilon > 0.0)) throw ConfigError("analysis.epsilon: must be positive");
  if (std::abs(kin_gains.delta_dot_max - envelope.delta_dot_max) > 1e-12)
    warnings.push_back("kin_gains.delta_dot_max differs from envelope.delta_dot_max");
  return warnings;
}

ExperimentConfig config_from_json(const json& j_in) {
  json j = j_in;
  if (!j.is_object()) throw ConfigError("<root>: expected an object");
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
    json base = config_to_json(preset(j["preset"].get<std::string>()));
    j.erase("preset");
    base.merge_patch(j);
    j = std::move(base);
  }
  const Node root(j, "");
  root.allow({"name", "robot", "envelope", "kin_gains", "pi_gains", "trajectory", "disturbance", "sim",
              "analysis", "seeds"});
  ExperimentConfig cfg;
  root.str("name", cfg.name);
  if (root.has("robot")) cfg.robot = parse_robot(root.child("robot"));
  if (root.has("envelope")) cfg.envelope = parse_envelope(root.child("envelope"));
  if (root.has("kin_gains")) cfg.kin_gains = parse_kin(root.child("kin_gains"));
  if (root.has("pi_gains")) cfg.pi_gains = parse_pi(root.child("pi_gains"));
  if (root.has("trajectory")) cfg.trajectory = parse_trajectory(root.child("trajectory"));
  if (root.has("disturbance")) cfg.disturbance = parse_disturbance(root.child("disturbance"), cfg.robot.m);
  if (root.has("sim")) cfg.sim = parse_sim(root.child("sim"));
  if (root.has("analysis")) cfg.analysis = parse_analysis(root.child("analysis"));
  if (root.has("seeds")) {
    const json& s = root.raw("seeds");
    if (!s.is_array()) throw ConfigError("seeds: expected an array of integers");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number_unsigned()) throw ConfigError("seeds[" + std::to_string(i) + "]: expected a non-negative integer");
      cfg.seeds.push_back(s[i].get<std::uint64_t>());
    }
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  const auto& p = c.robot;
  j["robot"] = {{"r", p.r}, {"a", p.a}, {"b", p.b}, {"m", p.m}, {"m_w", p.m_w}, {"I_theta", p.I_theta},
                {"I_phi", p.I_phi}, {"I_delta", p.I_delta}, {"I", p.I}};
  const auto& e = c.envelope;
  j["envelope"] = {{"delta_range", {e.delta_lo, e.delta_hi}},
                   {"delta_dot_max", e.delta_dot_max},
                   {"v_w_max", e.v_w_max},
                   {"A_d", e.A_d},
                   {"norm", e.norm == VelocityNorm::weighted ? "weighted" : "euclidean"}};
  if (e.V_d_override > 0) j["envelope"]["V_d"] = e.V_d_override;
  const auto& k = c.kin_gains;
  j["kin_gains"] = {{"k_x", k.k_x},         {"k_y", k.k_y},         {"k_theta", k.k_theta},
                    {"k_delta", k.k_delta}, {"eps_v", k.eps_v},     {"delta_max", k.delta_max},
                    {"delta_dot_max", k.delta_dot_max}, {"tau_ff", k.tau_ff}};
  const auto& g = c.pi_gains;
  j["pi_gains"] = {{"kp", vec_json(g.kp)}, {"ki", vec_json(g.ki)}, {"K_t", g.K_t},
                   {"eta_limit", vec_json(g.eta_limit)}};
  if (g.tau_limit) j["pi_gains"]["tau_limit"] = vec_json(*g.tau_limit);
  const auto& t = c.trajectory;
  j["trajectory"] = {{"kind", to_string(t.kind)}, {"interpolation_order", t.interpolation_order}};
  j["trajectory"]["flower"] = {{"amplitude", t.flower.amplitude}, {"petal_period", t.flower.petal_period},
                               {"sweep_period", t.flower.sweep_period}, {"cx", t.flower.cx}, {"cy", t.flower.cy}};
  j["trajectory"]["lissajous"] = {{"ax", t.lissajous.ax}, {"wx", t.lissajous.wx},
                                  {"phase_x", t.lissajous.phase_x}, {"ay", t.lissajous.ay},
                                  {"wy", t.lissajous.wy}, {"phase_y", t.lissajous.phase_y},
                                  {"theta", t.lissajous.theta}};
  if (!t.samples.empty()) {
    json arr = json::array();
    for (const auto& s : t.samples) arr.push_back({{"t", s.t}, {"x", s.x}, {"y", s.y}, {"theta", s.theta}});
    j["trajectory"]["samples"] = arr;
  }
  j["disturbance"] = disturbance_json(c.disturbance);
  const auto& s = c.sim;
  j["sim"] = {{"dt", s.dt},
              {"T", s.T},
              {"integrator", to_string(s.integrator)},
              {"control", to_string(s.control)},
              {"record_stride", s.record_stride},
              {"initial", to_string(s.initial)},
              {"q0", vec_json(s.q0.vec())},
              {"v0", vec_json(s.v0.vec())},
              {"divergence_limit", s.divergence_limit}};
  const auto& a = c.analysis;
  j["analysis"] = {{"epsilon", a.epsilon},
                   {"coriolis_substitution", a.coriolis_substitution},
                   {"transient", a.checks.transient},
                   {"passivity_rel_tol", a.checks.passivity_rel_tol},
                   {"checks",
                    {{"passivity", a.checks.passivity},
                     {"lyapunov", a.checks.lyapunov},
                     {"l2", a.checks.l2},
                     {"residual", a.checks.residual},
                     {"storage", a.checks.storage}}}};
  j["seeds"] = c.seeds;
  return j;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::string> preset_names() { return {"table1-floor-flower", "table1-wall-lissajous"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  const double b_f = 0.0305;
  if (name == "table1-floor-flower") {
    c.trajectory.kind = TrajectoryKind::flower;
    c.sim.T = 70.0;
    // Nominal floor run; the declared bounds still carry the wheel friction
    // (b_f) so the gain certificate is sized for the real robot.
    c.disturbance = UncertaintyModel::none();
    Vec6 d = Vec6::Zero();
    d[3] = b_f;
    c.disturbance.declared_d = d;
    c.disturbance.declared_L_f2 = b_f;
    return c;
  }
  if (name == "table1-wall-lissajous") {
    c.trajectory.kind = TrajectoryKind::lissajous;
    c.sim.T = 63.0;
    const double mg = c.robot.m * 9.81;
    Vec6 thrust = Vec6::Zero();
    thrust[1] = -0.98 * mg;  // counter-gravity thrust, f = -F
    c.disturbance = UncertaintyModel::composite(
        {UncertaintyModel::gravity_plane(c.robot.m, 9.81, -std::numbers::pi / 2),
         UncertaintyModel::constant_bias(thrust)});
    Vec6 d = Vec6::Zero();
    d[3] = b_f;
    c.disturbance.declared_d = d;
    c.disturbance.declared_L_f2 = b_f;
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("preset: unknown preset '" + name + "' (known: " + known + ")");
}

ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& dotted_path, double value) {
  json j = config_to_json(cfg);
  json* node = &j;
  std::stringstream ss(dotted_path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("sweep parameter: empty path");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& key = parts[i];
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError(dotted_path + ": '" + key + "' is not an array index");
      }
      if (idx >= node->size()) throw ConfigError(dotted_path + ": index " + key + " out of range");
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(key)) {
        if (!last) throw ConfigError(dotted_path + ": no such key '" + key + "'");
      }
      node = &(*node)[key];
    } else {
      throw ConfigError(dotted_path + ": cannot descend into a scalar at '" + key + "'");
    }
  }
  if (!node->is_null() && !node->is_number())
    throw ConfigError(dotted_path + ": target is not numeric");
  *node = value;
  if (parts.back() == "record_stride") *node = static_cast<int>(value);
  return config_from_json(j);
}

}  // namespace fwis
