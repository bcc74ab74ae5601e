// fwis: certify gains, simulate, analyze traces and run parameter sweeps.
// Exit codes: 0 pass, 1 check failed / run diverged, 2 usage or parse error.

#include "fwis/config.hpp"
#include "fwis/fixtures.hpp"
#include "fwis/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef FWIS_FIXTURE_DIR
#define FWIS_FIXTURE_DIR "docs/fixtures"
#endif

namespace {

using namespace fwis;

constexpr int kExitPass = 0, kExitFail = 1, kExitUsage = 2;

// Thrown for anything that maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path, preset_name, out;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "experiment config (JSON)");
  sub->add_option("--preset", c.preset_name, "built-in preset name");
  sub->add_option("--out", c.out, "output file (stdout when omitted)");
  sub->add_flag("--quiet", c.quiet, "suppress the human-readable summary");
}

ExperimentConfig load(const Common& c) {
  if (c.config_path.empty() == c.preset_name.empty())
    throw UsageError("give exactly one of --config or --preset");
  try {
    ExperimentConfig cfg = c.config_path.empty() ? preset(c.preset_name) : load_config(c.config_path);
    for (const auto& w : cfg.validate())
      if (!c.quiet) std::cerr << "warning: " << w << "\n";
    return cfg;
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  } catch (const InvalidInput& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError("--values: '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--values: empty value list");
  return out;
}

int cmd_certify(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const BoundSet b = cfg.bounds();
  const GainCertificate cert = certify(b, cfg.pi_gains, cfg.analysis.epsilon);
  emit(c.out, certificate_to_json(cfg, b, cert).dump(2) + "\n");
  if (!c.quiet) {
    std::fprintf(stderr, "threshold (d_v + A_v)/K_t = %.6g, min K_P = %.6g, mu = %.6g -> %s\n", cert.threshold,
                 cert.lambda_min_Kp, cert.mu, cert.pass ? "PASS" : "FAIL");
  }
  return cert.pass ? kExitPass : kExitFail;
}

int cmd_simulate(const Common& c, const std::string& trace_path) {
  const ExperimentConfig cfg = load(c);
  const std::string path = trace_path.empty() ? c.out : trace_path;
  try {
    const SimTrace tr = run(cfg.sim, cfg.trajectory, cfg.kin_gains, cfg.pi_gains, cfg.disturbance, cfg.robot);
    if (path.empty()) {
      write_trace_csv(tr, std::cout);
    } else {
      write_trace_csv(tr, path);
    }
    if (!c.quiet) std::fprintf(stderr, "%zu rows written\n", tr.rows.size());
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
  return kExitPass;
}

int cmd_analyze(const Common& c, const std::string& trace_path, bool series) {
  if (trace_path.empty()) throw UsageError("analyze needs --trace");
  const ExperimentConfig cfg = load(c);
  SimTrace tr;
  try {
    tr = read_trace_csv(trace_path);
  } catch (const TraceParseError& e) {
    throw UsageError(trace_path + ": " + e.what());
  }
  const BoundSet b = cfg.bounds();
  const GainCertificate cert = certify(b, cfg.pi_gains, cfg.analysis.epsilon);
  StabilityReport rep;
  try {
    rep = analyze(tr, cfg.pi_gains, cfg.disturbance, cfg.robot, b, cert, cfg.analysis.checks);
  } catch (const InvalidInput& e) {
    throw UsageError(trace_path + ": " + e.what());
  }
  emit(c.out, report_to_json(rep, series).dump(2) + "\n");
  if (!c.quiet) std::cerr << report_summary(rep);
  return rep.pass ? kExitPass : kExitFail;
}

struct SweepRow {
  double value = 0;
  bool ok = false;
  std::string error;
  GainCertificate cert;
  StabilityReport rep;
};

int cmd_sweep(const Common& c, const std::string& param, const std::string& values_csv, int jobs) {
  if (param.empty()) throw UsageError("sweep needs --param");
  const std::vector<double> values = parse_values(values_csv);
  const ExperimentConfig base = load(c);
  std::vector<ExperimentConfig> cfgs;
  for (double v : values) {
    try {
      cfgs.push_back(with_parameter(base, param, v));
      cfgs.back().validate();
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    } catch (const InvalidInput& e) {
      throw UsageError(param + " = " + std::to_string(v) + ": " + e.what());
    }
  }

  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& r = rows[i];
      const ExperimentConfig& cfg = cfgs[i];
      r.value = values[i];
      const BoundSet b = cfg.bounds();
      r.cert = certify(b, cfg.pi_gains, cfg.analysis.epsilon);
      try {
        const SimTrace tr = run(cfg.sim, cfg.trajectory, cfg.kin_gains, cfg.pi_gains, cfg.disturbance, cfg.robot);
        r.rep = analyze(tr, cfg.pi_gains, cfg.disturbance, cfg.robot, b, r.cert, cfg.analysis.checks);
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads = std::min<std::size_t>(jobs > 0 ? jobs : hw, rows.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv.precision(10);
  csv << "value,cert_pass,mu,threshold,rms_pos,rms_heading,passivity_max_residual,passivity_slack,"
         "lyapunov_slack,l2_slack,residual_slack,storage_slack,pass,error\n";
  auto slack = [](const CheckSeries& s) {
    return s.status == CheckStatus::pass || s.status == CheckStatus::fail ? s.worst_slack
                                                                          : std::numeric_limits<double>::quiet_NaN();
  };
  bool all_ran = true;
  for (const auto& r : rows) {
    csv << r.value << ',' << (r.cert.pass ? 1 : 0) << ',' << r.cert.mu << ',' << r.cert.threshold << ',';
    if (r.ok) {
      const double l2 = r.rep.l2.status == CheckStatus::uncertified ? std::numeric_limits<double>::quiet_NaN()
                                                                     : r.rep.l2.slack;
      csv << r.rep.tracking.rms_pos << ',' << r.rep.tracking.rms_heading << ',' << r.rep.passivity.max_residual
          << ',' << slack(r.rep.passivity.series) << ',' << slack(r.rep.lyapunov.series) << ',' << l2 << ','
          << slack(r.rep.residual) << ',' << slack(r.rep.storage) << ',' << ((r.rep.pass && r.cert.pass) ? 1 : 0)
          << ",\n";
    } else {
      all_ran = false;
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      csv << ",,,,,,,,,0," << err << "\n";
    }
  }
  if (c.out.empty()) {
    std::cout << csv.str();
  } else {
    std::filesystem::create_directories(c.out);
    emit((std::filesystem::path(c.out) / "summary.csv").string(), csv.str());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].ok) continue;
      json j = report_to_json(rows[i].rep, false);
      j["parameter"] = param;
      j["value"] = rows[i].value;
      emit((std::filesystem::path(c.out) / ("run_" + std::to_string(i) + ".json")).string(), j.dump(2) + "\n");
    }
  }
  if (!c.quiet) std::fprintf(stderr, "%zu runs, %s\n", rows.size(), all_ran ? "all completed" : "some runs failed");
  return all_ran ? kExitPass : kExitFail;
}

int cmd_validate_fixtures(const std::string& dir, bool quiet) {
  FixtureReport rep;
  try {
    rep = validate_fixtures(dir);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  std::size_t failed = 0;
  for (const auto& ch : rep.checks) {
    if (!ch.pass) ++failed;
    if (!quiet || !ch.pass) {
      std::printf("%s %s %s expected %.10g actual %.10g%s%s\n", ch.pass ? "ok  " : "FAIL", ch.fixture.c_str(),
                  ch.quantity.c_str(), ch.expected, ch.actual, ch.message.empty() ? "" : "  ",
                  ch.pass ? "" : ch.message.c_str());
    }
  }
  std::printf("%zu checks, %zu failed\n", rep.checks.size(), failed);
  return rep.pass ? kExitPass : kExitFail;
}

int cmd_show_config(const Common& c) {
  const ExperimentConfig cfg = load(c);
  emit(c.out, config_to_json(cfg).dump(2) + "\n");
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Four-wheel steered robot: gain certificates, closed-loop simulation and stability analysis"};
  app.require_subcommand(1);

  Common certify_opts, sim_opts, an_opts, sweep_opts, show_opts;
  std::string sim_trace, an_trace, sweep_param, sweep_values, fixture_dir = FWIS_FIXTURE_DIR;
  bool series = false, fixtures_quiet = false;
  int jobs = 0;

  auto* certify_cmd = app.add_subcommand("certify", "check the gain condition and write a certificate");
  add_common(certify_cmd, certify_opts);

  auto* sim_cmd = app.add_subcommand("simulate", "run the closed loop and write a CSV trace");
  add_common(sim_cmd, sim_opts);
  sim_cmd->add_option("--trace", sim_trace, "trace output path (defaults to --out, else stdout)");

  auto* an_cmd = app.add_subcommand("analyze", "run the stability checks on a trace");
  add_common(an_cmd, an_opts);
  an_cmd->add_option("--trace", an_trace, "trace produced by simulate")->required();
  an_cmd->add_flag("--series", series, "include per-sample slack series in the report");

  auto* sweep_cmd = app.add_subcommand("sweep", "simulate and analyze over a list of parameter values");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--param", sweep_param, "dotted config path, e.g. pi_gains.kp.0")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_cmd->add_option("--jobs", jobs, "worker threads (default: hardware concurrency)");

  auto* fx_cmd = app.add_subcommand("validate-fixtures", "recompute every golden fixture value");
  fx_cmd->add_option("--dir", fixture_dir, "fixture directory");
  fx_cmd->add_flag("--quiet", fixtures_quiet, "only print failures");

  auto* show_cmd = app.add_subcommand("show-config", "print the effective config after preset merging");
  add_common(show_cmd, show_opts);

  auto* list_cmd = app.add_subcommand("presets", "list built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*certify_cmd) return cmd_certify(certify_opts);
    if (*sim_cmd) return cmd_simulate(sim_opts, sim_trace);
    if (*an_cmd) return cmd_analyze(an_opts, an_trace, series);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, sweep_param, sweep_values, jobs);
    if (*fx_cmd) return cmd_validate_fixtures(fixture_dir, fixtures_quiet);
    if (*show_cmd) return cmd_show_config(show_opts);
    if (*list_cmd) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return kExitPass;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
