#pragma once

// Experiment driver behind the command-line tool: theta sweeps at gate and
// pulse level, single-point reports, layout search orchestration, rf-noise
// calibration, config files, and CSV emission.

#include "pqcm/readout.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pqcm {

inline constexpr const char* kToolVersion = "pqcm 1.0.0";

// Noise-free estimator pipeline must close to the theory values within this.
inline constexpr double kPipelineTol = 1e-6;

inline const std::vector<double> kDefaultLayoutGrid = {
    std::numbers::pi / 12, std::numbers::pi / 4, 5 * std::numbers::pi / 12};
inline constexpr double kDefaultLayoutTol = 1e-8;

enum class ExitCode : int { ok = 0, tolerance = 1, usage = 2, missing_cache = 3 };

struct MissingCacheError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SignChoice { plus, minus, both };
enum class Level { gate, pulse, both };

struct SweepConfig {
  // Default grid: 0 to pi/2 in pi/12 increments, both signs.
  double theta_start = 0.0;
  double theta_end = std::numbers::pi / 2;
  int steps = 7;
  SignChoice signs = SignChoice::both;
  Level level = Level::gate;
  double delta = 0.0;    // rf amplitude error, pulse level only
  double epsilon = 1e-5; // pseudo-pure polarization
  long long shots = 0;   // > 0 switches expectation readout to sampling
  std::uint64_t seed = 0;
  SpinSystem spins;
  std::string layout_path = "pqcm_layout.txt";
};

/// "0.37", "pi", "pi/12", "3pi/4", "-pi/2".
double parse_angle(const std::string& text);

/// `key = value` lines, `#` comments; accepts the sweep keys (theta_start,
/// theta_end, steps, sign, level, delta, epsilon, shots, seed, layout) and
/// the spin-system keys. Throws std::invalid_argument on unknown keys.
void load_config_file(SweepConfig& cfg, const std::string& path);

std::vector<double> sweep_grid(const SweepConfig& cfg);

/// Preparation rotation followed by the canonical completion machine.
Unitary gate_level_unitary(double theta, Sign sign);

struct RunReport {
  std::vector<ExperimentRecord> gate_records;
  std::vector<ExperimentRecord> pulse_records;
  std::string csv;
  bool closure_ok = true;  // every noise-free expectation-mode record closed
};

RunReport run_sweep(const SweepConfig& cfg);

struct PointReport {
  Level level = Level::gate;
  ExperimentRecord record;
  DensityMatrix rho_input;  // single-qubit state being cloned
  std::optional<StateVector> failure;  // probe-|1> branch, empty when gamma = 1
  GroupedSignals signals_b;
  GroupedSignals signals_c;
};

/// level must be gate or pulse.
PointReport run_point(const SweepConfig& cfg, double theta, Sign sign, Level level);

std::string format_point_report(const PointReport& report);

struct LayoutReport {
  bool from_cache = false;
  GateCircuit circuit;
  LayoutSearchResult search;    // meaningful when !from_cache
  double verify_residual = 0.0;
  double wall_seconds = 0.0;
};

/// Loads and re-verifies an existing cache, or searches and writes one.
/// Throws std::runtime_error when a cached layout fails verification.
LayoutReport find_or_verify_layout(const std::string& path,
                                   const std::vector<double>& grid, double tol);

/// Loads the cache; MissingCacheError when the file does not exist.
GateCircuit require_layout(const std::string& path);

struct CalibrationResult {
  double delta = 0.0;
  double mean_infidelity = 0.0;
  // theta = pi/4 fidelities at the calibrated delta, both signs
  double f_b_plus = 0.0, f_c_plus = 0.0, f_b_minus = 0.0, f_c_minus = 0.0;
  bool in_band = false;  // mean in [0.01, 0.03] and pi/4 fidelities in [0.96, 1)
  std::vector<std::pair<double, double>> scan;  // (delta, mean infidelity)
};

/// Coarse scan of the uniform rf amplitude error delta in [0, delta_max],
/// picking the delta whose grid-mean clone infidelity is closest to 0.02.
CalibrationResult calibrate_noise(const SweepConfig& cfg, double delta_max = 0.1,
                                  int scan_steps = 41);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace pqcm
