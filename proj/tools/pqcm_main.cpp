// Command-line driver for the probabilistic-cloning simulator.
//
// Subcommands: sweep, run, find-layout, compile, calibrate-noise.
// Exit codes: 0 success, 1 tolerance violation, 2 usage error, 3 missing
// layout cache.

#include "pqcm/driver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace pqcm;

int to_exit(ExitCode code) { return static_cast<int>(code); }

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write output file: " + path);
  f << text;
}

Sign parse_sign(const std::string& s) {
  if (s == "+") return Sign::plus;
  if (s == "-") return Sign::minus;
  throw CLI::ValidationError("--sign", "expected + or -");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) grid.push_back(parse_angle(item));
  return grid;
}

struct CommonFlags {
  std::string config_path;
  std::string theta_start = "0";
  std::string theta_end = "pi/2";
  std::string sign = "both";
  std::string level;
  std::string layout;
  int steps = -1;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  long long shots = -1;
  std::int64_t seed = -1;
};

// Config-file values override defaults; explicitly passed flags override both.
SweepConfig resolve_config(const CLI::App& cmd, const CommonFlags& flags) {
  SweepConfig cfg;
  if (!flags.config_path.empty()) load_config_file(cfg, flags.config_path);
  auto passed = [&](const std::string& name) {
    const CLI::Option* opt = cmd.get_option_no_throw(name);
    return opt && opt->count() > 0;
  };
  if (passed("--theta-start")) cfg.theta_start = parse_angle(flags.theta_start);
  if (passed("--theta-end")) cfg.theta_end = parse_angle(flags.theta_end);
  if (passed("--steps")) cfg.steps = flags.steps;
  if (passed("--sign")) {
    if (flags.sign == "both") cfg.signs = SignChoice::both;
    else cfg.signs = parse_sign(flags.sign) == Sign::plus ? SignChoice::plus
                                                          : SignChoice::minus;
  }
  if (passed("--level")) {
    if (flags.level == "gate") cfg.level = Level::gate;
    else if (flags.level == "pulse") cfg.level = Level::pulse;
    else if (flags.level == "both") cfg.level = Level::both;
    else throw CLI::ValidationError("--level", "expected gate, pulse or both");
  }
  if (passed("--delta")) cfg.delta = flags.delta;
  if (passed("--epsilon")) cfg.epsilon = flags.epsilon;
  if (passed("--shots")) cfg.shots = flags.shots;
  if (passed("--seed")) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (passed("--layout")) cfg.layout_path = flags.layout;
  return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool sweep_flags) {
  cmd->add_option("--config", flags.config_path,
                  "key = value config file (sweep and spin-system keys)");
  cmd->add_option("--sign", flags.sign, "input-state sign: +, - or both");
  cmd->add_option("--level", flags.level, "simulation level: gate, pulse or both");
  cmd->add_option("--delta", flags.delta, "rf amplitude error (pulse level)");
  cmd->add_option("--epsilon", flags.epsilon, "pseudo-pure polarization");
  cmd->add_option("--layout", flags.layout, "layout cache path");
  if (sweep_flags) {
    cmd->add_option("--theta-start", flags.theta_start, "grid start (radians or pi fraction)");
    cmd->add_option("--theta-end", flags.theta_end, "grid end (radians or pi fraction)");
    cmd->add_option("--steps", flags.steps, "number of grid points");
    cmd->add_option("--shots", flags.shots, "sampling mode: shots per expectation value");
    cmd->add_option("--seed", flags.seed, "sampling-mode random seed");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact simulator and analysis toolkit for 1->2 probabilistic quantum "
               "cloning on a three-spin NMR register"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonFlags sweep_flags, run_flags, compile_flags, calib_flags;
  std::string out_path, run_theta, compile_theta, grid_text = "pi/12,pi/4,5pi/12";
  double layout_tol = kDefaultLayoutTol;

  CLI::App* sweep = app.add_subcommand("sweep", "theta sweep: efficiency and fidelities");
  add_common(sweep, sweep_flags, true);
  sweep->add_option("--out", out_path, "write CSV here instead of stdout");

  CLI::App* run = app.add_subcommand("run", "detailed single-point report");
  add_common(run, run_flags, false);
  run->add_option("--theta", run_theta, "set angle (radians or pi fraction)")->required();
  run->add_option("--out", out_path, "write the report here instead of stdout");

  CLI::App* find = app.add_subcommand("find-layout",
                                      "search or re-verify the five-gate network layout");
  find->add_option("--grid", grid_text, "verification grid, comma-separated angles");
  find->add_option("--tol", layout_tol, "acceptance residual");
  std::string find_out = "pqcm_layout.txt";
  find->add_option("--out", find_out, "layout cache path");

  CLI::App* compile = app.add_subcommand("compile",
                                         "emit the pulse sequence for one theta");
  add_common(compile, compile_flags, false);
  compile->add_option("--theta", compile_theta, "set angle (radians or pi fraction)")
      ->required();
  std::string compile_out = "pqcm_sequence.txt";
  compile->add_option("--out", compile_out, "pulse-sequence file path");

  CLI::App* calib = app.add_subcommand(
      "calibrate-noise", "scan the rf error delta against the infidelity band");
  add_common(calib, calib_flags, false);
  double delta_max = 0.1;
  int scan_steps = 41;
  calib->add_option("--delta-max", delta_max, "scan upper bound");
  calib->add_option("--scan-steps", scan_steps, "scan resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return to_exit(ExitCode::usage);
  }

  try {
    if (sweep->parsed()) {
      const SweepConfig cfg = resolve_config(*sweep, sweep_flags);
      const RunReport report = run_sweep(cfg);
      write_or_print(out_path, report.csv);
      if (!report.closure_ok) {
        std::cerr << "pqcm: noise-free records violate the pipeline tolerance\n";
        return to_exit(ExitCode::tolerance);
      }
      return to_exit(ExitCode::ok);
    }

    if (run->parsed()) {
      const SweepConfig cfg = resolve_config(*run, run_flags);
      const double theta = parse_angle(run_theta);
      const Sign sign =
          run->count("--sign") == 0 ? Sign::plus : parse_sign(run_flags.sign);
      std::string text;
      if (cfg.level == Level::both || cfg.level == Level::gate)
        text += format_point_report(run_point(cfg, theta, sign, Level::gate));
      if (cfg.level == Level::both || cfg.level == Level::pulse)
        text += format_point_report(run_point(cfg, theta, sign, Level::pulse));
      write_or_print(out_path, text);
      return to_exit(ExitCode::ok);
    }

    if (find->parsed()) {
      const std::vector<double> grid = parse_grid(grid_text);
      const LayoutReport report = find_or_verify_layout(find_out, grid, layout_tol);
      if (report.from_cache) {
        std::cout << "cache verified: " << find_out << " (max residual "
                  << report.verify_residual << ", " << report.wall_seconds << " s)\n";
        return to_exit(ExitCode::ok);
      }
      if (!report.search.found) {
        std::cerr << "no layout found within tolerance " << layout_tol
                  << " after " << report.search.candidates_checked
                  << " candidates; nearest miss residual " << report.search.residual
                  << ":\n";
        for (const Gate& g : report.search.circuit)
          std::cerr << "  kind=" << static_cast<int>(g.kind) << " control=" << g.control
                    << " target=" << g.target << "\n";
        return to_exit(ExitCode::tolerance);
      }
      std::cout << "layout found: candidate index " << report.search.candidate_index
                << ", " << report.search.candidates_checked << " candidates examined in "
                << report.wall_seconds << " s (residual " << report.search.residual
                << ")\nwritten to " << find_out << "\n";
      return to_exit(ExitCode::ok);
    }

    if (compile->parsed()) {
      const SweepConfig cfg = resolve_config(*compile, compile_flags);
      const double theta = parse_angle(compile_theta);
      const Sign sign =
          compile->count("--sign") == 0 ? Sign::plus : parse_sign(compile_flags.sign);
      const GateCircuit circuit = require_layout(cfg.layout_path);
      const PulseSequence seq = full_experiment_sequence(theta, sign, cfg.spins, circuit);

      char header[128];
      std::snprintf(header, sizeof(header), "pqcm-pulse theta=%.17g sign=%s duration=%.17g",
                    theta, sign == Sign::plus ? "+" : "-", seq.total_duration());
      save_pulse_sequence(compile_out, seq, header);

      const Unitary u = sequence_propagator(seq, cfg.spins);
      const double residual =
          ray_distance(u * basis_state(3, 0), target_output({theta, sign}));
      std::cout << "pulse sequence written to " << compile_out << "\n"
                << "total duration: " << seq.total_duration() * 1e3 << " ms\n"
                << "propagator check: residual " << residual << " -> "
                << (residual <= kPipelineTol ? "pass" : "FAIL") << "\n";
      return to_exit(residual <= kPipelineTol ? ExitCode::ok : ExitCode::tolerance);
    }

    if (calib->parsed()) {
      const SweepConfig cfg = resolve_config(*calib, calib_flags);
      const CalibrationResult result = calibrate_noise(cfg, delta_max, scan_steps);
      std::cout << "calibrated delta: " << result.delta << "\n"
                << "mean clone infidelity over the grid: " << result.mean_infidelity
                << "\n"
                << "theta=pi/4 fidelities: F_b(+)=" << result.f_b_plus
                << " F_c(+)=" << result.f_c_plus << " F_b(-)=" << result.f_b_minus
                << " F_c(-)=" << result.f_c_minus << "\n"
                << "band check [0.01,0.03] and [0.96,1): "
                << (result.in_band ? "pass" : "FAIL") << "\n";
      return to_exit(result.in_band ? ExitCode::ok : ExitCode::tolerance);
    }
  } catch (const MissingCacheError& e) {
    std::cerr << "pqcm: " << e.what() << "\n";
    return to_exit(ExitCode::missing_cache);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "pqcm: " << e.what() << "\n";
    return to_exit(ExitCode::usage);
  } catch (const std::invalid_argument& e) {
    std::cerr << "pqcm: " << e.what() << "\n";
    return to_exit(ExitCode::usage);
  } catch (const std::domain_error& e) {
    std::cerr << "pqcm: " << e.what() << "\n";
    return to_exit(ExitCode::usage);
  } catch (const std::exception& e) {
    std::cerr << "pqcm: " << e.what() << "\n";
    return to_exit(ExitCode::tolerance);
  }
  return to_exit(ExitCode::usage);
}
