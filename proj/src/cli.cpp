#include "flexarm/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "flexarm/errors.hpp"
#include "flexarm/report.hpp"
#include "flexarm/scenario.hpp"
#include "flexarm/sim.hpp"

namespace flexarm::cli {

namespace {

namespace fs = std::filesystem;

struct RunOptions {
  std::string ref;
  bool all = false;
  std::string actuator;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::string out_dir;
  bool override_certificates = false;
  bool strict_hardware = false;
};

std::optional<fs::path> optional_dir(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "flexarm_out";
}

int run_scenario(Scenario s, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (!opt.actuator.empty()) s.actuator = parse_actuator(opt.actuator, s.plant.u_max);
    if (opt.dt) s.sim.dt = *opt.dt;
    if (opt.t_final) s.sim.t_final = *opt.t_final;
    s.validate();
    for (const auto& w : check_actuator_budget(s.plant, s.controller, opt.strict_hardware)) {
      err << "warning: " << s.name << ": " << w << '\n';
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const GainError& e) {
    err << "error: " << s.name << ": " << e.what() << '\n';
    return kConfigError;
  }

  GainCertificate cert;
  try {
    cert = validate_gains(s.plant, s.controller);
  } catch (const GainError& e) {
    err << "error: " << s.name << ": " << e.what() << '\n';
    return kConfigError;
  }
  if (!cert.pass && !opt.override_certificates) {
    err << "error: " << s.name << ": gain certificate failed (" << cert.failed_checks()
        << "); pass --override-certificates to run anyway\n";
    out << analysis_report(s);
    return kCertificateFailure;
  }

  const Trajectory traj = simulate(s.plant, s.controller, s.actuator, s.x0, s.sim, true);
  const Metrics metrics = compute_metrics(traj, s.q_star);
  const std::string summary = run_summary(s, cert, traj, metrics);

  const fs::path dir = resolve_out_dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path csv_path = dir / (s.name + ".csv");
  const fs::path summary_path = dir / (s.name + "_summary.txt");
  {
    std::ofstream csv(csv_path);
    std::ofstream sum(summary_path);
    if (!csv || !sum) {
      err << "error: cannot write to output directory " << dir.string() << '\n';
      return kInternalError;
    }
    write_csv(csv, traj);
    sum << summary;
  }
  out << summary << "wrote " << csv_path.string() << " and " << summary_path.string() << '\n';
  if (traj.diverged()) {
    err << "error: " << s.name << ": simulation diverged at t = " << *traj.divergence_time << " s\n";
    return kDivergence;
  }
  return kOk;
}

int cmd_run(const RunOptions& opt, const std::string& config_dir, std::ostream& out, std::ostream& err) {
  if (!opt.all) {
    if (opt.ref.empty()) {
      err << "error: run needs a scenario name or path (or --all)\n";
      return kConfigError;
    }
    Scenario s;
    try {
      s = resolve_scenario(opt.ref, optional_dir(config_dir));
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return kConfigError;
    }
    return run_scenario(std::move(s), opt, out, err);
  }

  // Independent simulations run concurrently; console output is replayed in order.
  struct Result {
    int code;
    std::string out, err;
  };
  std::vector<std::future<Result>> jobs;
  for (const Scenario& s : builtin_scenarios()) {
    jobs.push_back(std::async(std::launch::async, [s, &opt] {
      std::ostringstream o, e;
      const int code = run_scenario(s, opt, o, e);
      return Result{code, o.str(), e.str()};
    }));
  }
  int code = kOk;
  for (auto& job : jobs) {
    const Result r = job.get();
    out << r.out << '\n';
    err << r.err;
    if (code == kOk) code = r.code;
  }
  return code;
}

int cmd_analyze(const std::string& ref, const std::string& config_dir, bool matrices, std::ostream& out,
                std::ostream& err) {
  try {
    out << analysis_report(resolve_scenario(ref, optional_dir(config_dir)), matrices);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

int cmd_list(const std::string& config_dir, std::ostream& out, std::ostream& err) {
  try {
    for (const auto& l : list_scenarios(optional_dir(config_dir))) {
      out << l.name << "\t" << l.description;
      if (l.source != "builtin") out << "\t[" << l.source << "]";
      out << '\n';
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and stability analysis for a 2-DOF flexible-joint arm under passivity-based control",
               "flexarm"};
  app.require_subcommand(1);
  std::string config_dir;
  app.add_option("--config-dir", config_dir, "Directory of scenario JSON files, addressable by file stem");

  RunOptions opt;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write <name>.csv and <name>_summary.txt");
  run_cmd->add_option("scenario", opt.ref, "Built-in name or path to a scenario JSON file");
  run_cmd->add_flag("--all", opt.all, "Run every built-in scenario");
  run_cmd->add_option("--actuator", opt.actuator, "ideal | deadzone[:thr] | clamp[:u_max]");
  run_cmd->add_option("--dt", opt.dt, "Integration step [s]");
  run_cmd->add_option("--t-final", opt.t_final, "Horizon [s]");
  run_cmd->add_option("--out", opt.out_dir, std::string("Output directory (default $") + kOutDirEnv + " or ./flexarm_out)");
  run_cmd->add_flag("--override-certificates", opt.override_certificates, "Simulate even if a gain certificate fails");
  run_cmd->add_flag("--strict-hardware", opt.strict_hardware, "Treat saturation bound > u_max as an error");

  std::string analyze_ref;
  bool matrices = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Print every applicable stability certificate");
  analyze_cmd->add_option("scenario", analyze_ref, "Built-in name or path")->required();
  analyze_cmd->add_flag("--matrices", matrices, "Also print the assembled matrices");

  auto* list_cmd = app.add_subcommand("list", "List built-in (and --config-dir) scenarios");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(opt, config_dir, out, err);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_ref, config_dir, matrices, out, err);
    if (list_cmd->parsed()) return cmd_list(config_dir, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace flexarm::cli
