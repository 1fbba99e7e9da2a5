#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcs/analysis.hpp"
#include "tcs/harness.hpp"
#include "tcs/verification.hpp"

namespace tcs {

namespace {

struct ConfigSource {
  std::string preset_name;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string variant = "strict";
};

void add_config_options(CLI::App* cmd, ConfigSource& src) {
  auto* preset_opt =
      cmd->add_option("--preset", src.preset_name, "Named scenario preset");
  cmd->add_option("--config", src.config_path, "Scenario config file")
      ->excludes(preset_opt);
  cmd->add_option("--set", src.overrides,
                  "Override a config key (key=value, repeatable)");
  cmd->add_option("--variant", src.variant,
                  "Hypothesis variant gating the verdict")
      ->check(CLI::IsMember({"strict", "relaxed"}));
}

// The check and simulate commands fall back to the reference scenario so
// `tcsflock check` works out of the box.
ScenarioConfig resolve_config(const ConfigSource& src) {
  ScenarioConfig cfg;
  if (!src.config_path.empty()) {
    cfg = load_config(src.config_path);
  } else if (!src.preset_name.empty()) {
    cfg = preset(src.preset_name);
  } else {
    cfg = preset("paper-sec6");
  }
  for (const std::string& assignment : src.overrides) {
    apply_override(cfg, assignment);
  }
  cfg.validate();
  return cfg;
}

GateVariant resolve_variant(const ConfigSource& src) {
  return src.variant == "relaxed" ? GateVariant::relaxed
                                  : GateVariant::strict;
}

std::vector<double> parse_list(const std::string& text,
                               const std::string& flag) {
  std::vector<double> out;
  std::string::size_type start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    const std::string item =
        text.substr(start, pos == std::string::npos ? pos : pos - start);
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": expected a comma-separated list of reals, "
                        "got '" + text + "'");
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

int run_check_command(const ConfigSource& src) {
  const RunReport rep = run_check(resolve_config(src), resolve_variant(src));
  std::cout << report_to_string(rep);
  return rep.exit_code;
}

int run_simulate_command(const ConfigSource& src,
                         const std::string& timeseries_path,
                         const std::string& report_path) {
  Trajectory traj;
  const RunReport rep =
      run_simulation(resolve_config(src), resolve_variant(src), &traj);
  if (!timeseries_path.empty() && !traj.records.empty()) {
    write_timeseries(traj, timeseries_path);
  }
  if (!report_path.empty()) save_report(rep, report_path);
  std::cout << report_to_string(rep);
  return rep.exit_code;
}

int run_fit_command(const std::string& input, const std::string& window) {
  const TimeSeries ts = read_timeseries(input);
  if (ts.rows() == 0) throw ConfigError(input + ": no data rows");
  double lo = 0.5 * ts.t.back();
  double hi = ts.t.back();
  if (!window.empty()) {
    const auto comma = window.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("--window: expected 'start,end'");
    }
    try {
      lo = std::stod(window.substr(0, comma));
      hi = std::stod(window.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError("--window: expected 'start,end'");
    }
  }
  const std::pair<const char*, const std::vector<double>*> quantities[] = {
      {"X", &ts.X}, {"V", &ts.V}, {"Tnorm", &ts.Tnorm}};
  for (const auto& [name, values] : quantities) {
    try {
      const DecayFit f = fit_exponential(ts.t, *values, lo, hi, name);
      std::printf("%s: rate=%.10g intercept=%.10g r2=%.10g samples=%zu\n",
                  name, f.rate, f.intercept, f.r_squared, f.samples);
    } catch (const std::invalid_argument& e) {
      std::printf("%s: fit unavailable (%s)\n", name, e.what());
    }
  }
  return kExitOk;
}

int run_oracle_command(const ConfigSource& src, double t_end, double tol) {
  ScenarioConfig cfg = resolve_config(src);
  cfg.t_end = t_end;
  const ParticleEnsemble s0 = sample_initial_data(cfg);
  const ModelParams p = cfg.model_params();
  const IntegratorConfig icfg = cfg.integrator_config();

  const DiagnosticsTracker tracker(s0, cfg.eps);
  const Trajectory traj = integrate(s0, p, icfg, tracker);
  const OracleDeviation dev = fluctuation_oracle_deviation(s0, p, icfg, traj);

  std::printf("fluctuation oracle over [0, %.10g]: %zu records compared\n",
              t_end, dev.compared);
  std::printf("  max |dX|=%.10g  max |dV|=%.10g  max |dTnorm|=%.10g\n",
              dev.dX, dev.dV, dev.dTnorm);
  if (dev.worst() > tol) {
    std::printf("  DISAGREEMENT: worst deviation %.10g exceeds %.10g\n",
                dev.worst(), tol);
    return kExitViolation;
  }
  std::printf("  agreement within %.10g\n", tol);
  return kExitOk;
}

int run_sweep_command(const ConfigSource& src, const std::string& k1_list,
                      const std::string& k2_list, const std::string& e0_list,
                      const std::string& out_dir) {
  const ScenarioConfig base = resolve_config(src);
  SweepSpec spec;
  if (!k1_list.empty()) spec.kappa1 = parse_list(k1_list, "--kappa1");
  if (!k2_list.empty()) spec.kappa2 = parse_list(k2_list, "--kappa2");
  if (!e0_list.empty()) spec.eps0 = parse_list(e0_list, "--eps0");

  const SweepResult result = run_sweep(base, spec, resolve_variant(src));
  const std::string summary = sweep_summary(result);
  std::cout << summary;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const SweepCell& cell : result.cells) {
      save_report(cell.report, out_dir + "/cell_" +
                                   std::to_string(cell.index) + ".txt");
    }
    std::ofstream out(out_dir + "/summary.txt");
    if (!out) throw ConfigError("cannot open '" + out_dir + "/summary.txt'");
    out << summary;
  }
  return result.exit_code;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{
      "Thermodynamic flocking in a harmonic potential: simulation and "
      "verification",
      "tcsflock"};
  app.require_subcommand(1);

  ConfigSource check_src;
  auto* check_cmd = app.add_subcommand(
      "check", "Evaluate the flocking hypotheses for a scenario");
  add_config_options(check_cmd, check_src);

  ConfigSource sim_src;
  std::string timeseries_path;
  std::string report_path;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Integrate a scenario and verify its decay bounds");
  add_config_options(sim_cmd, sim_src);
  sim_cmd->add_option("--timeseries", timeseries_path,
                      "Write per-record diagnostics to this CSV file");
  sim_cmd->add_option("--report", report_path,
                      "Write the run report to this file");

  std::string fit_input;
  std::string fit_window;
  auto* fit_cmd = app.add_subcommand(
      "fit", "Fit exponential decay rates to a saved time series");
  fit_cmd->add_option("--input", fit_input, "Time series CSV to analyze")
      ->required();
  fit_cmd->add_option("--window", fit_window,
                      "Fit window 'start,end' (default: last half)");

  ConfigSource oracle_src;
  double oracle_t_end = 10.0;
  double oracle_tol = 1e-6;
  auto* oracle_cmd = app.add_subcommand(
      "oracle",
      "Cross-check the tracked fluctuation norms against a direct "
      "integration of the fluctuation system");
  add_config_options(oracle_cmd, oracle_src);
  oracle_cmd->add_option("--t-end", oracle_t_end, "Comparison horizon");
  oracle_cmd->add_option("--tol", oracle_tol, "Allowed norm deviation");

  ConfigSource sweep_src;
  std::string sweep_k1;
  std::string sweep_k2;
  std::string sweep_e0;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Run a grid of scenarios over couplings and the fluctuation "
               "radius");
  add_config_options(sweep_cmd, sweep_src);
  sweep_cmd->add_option("--kappa1", sweep_k1,
                        "Comma-separated kappa1 values");
  sweep_cmd->add_option("--kappa2", sweep_k2,
                        "Comma-separated kappa2 values");
  sweep_cmd->add_option("--eps0", sweep_e0, "Comma-separated eps0 values");
  sweep_cmd->add_option("--out", sweep_out,
                        "Directory for per-cell reports and the summary");

  // CLI11 wants argv-style reversed arguments when parsing a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (check_cmd->parsed()) return run_check_command(check_src);
    if (sim_cmd->parsed()) {
      return run_simulate_command(sim_src, timeseries_path, report_path);
    }
    if (fit_cmd->parsed()) return run_fit_command(fit_input, fit_window);
    if (oracle_cmd->parsed()) {
      return run_oracle_command(oracle_src, oracle_t_end, oracle_tol);
    }
    if (sweep_cmd->parsed()) {
      return run_sweep_command(sweep_src, sweep_k1, sweep_k2, sweep_e0,
                               sweep_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BlowupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const CollapseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace tcs
