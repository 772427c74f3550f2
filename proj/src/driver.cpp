#include "pqcm/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pqcm {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string sign_token(SignChoice s) {
  switch (s) {
    case SignChoice::plus: return "+";
    case SignChoice::minus: return "-";
    default: return "both";
  }
}

std::string level_token(Level l) {
  switch (l) {
    case Level::gate: return "gate";
    case Level::pulse: return "pulse";
    default: return "both";
  }
}

std::vector<Sign> signs_of(SignChoice c) {
  switch (c) {
    case SignChoice::plus: return {Sign::plus};
    case SignChoice::minus: return {Sign::minus};
    default: return {Sign::plus, Sign::minus};
  }
}

}  // namespace

double parse_angle(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw std::invalid_argument("empty angle");

  double sign = 1.0;
  size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') sign = (s[pos++] == '-') ? -1.0 : 1.0;

  const size_t pi_at = s.find("pi", pos);
  if (pi_at == std::string::npos) {
    size_t used = 0;
    const double v = std::stod(s.substr(pos), &used);
    if (used != s.size() - pos) throw std::invalid_argument("bad angle: " + text);
    return sign * v;
  }

  double numerator = 1.0;
  if (pi_at > pos) {
    size_t used = 0;
    numerator = std::stod(s.substr(pos, pi_at - pos), &used);
    if (used != pi_at - pos) throw std::invalid_argument("bad angle: " + text);
  }
  double denominator = 1.0;
  size_t rest = pi_at + 2;
  if (rest < s.size()) {
    if (s[rest] != '/') throw std::invalid_argument("bad angle: " + text);
    size_t used = 0;
    denominator = std::stod(s.substr(rest + 1), &used);
    if (used != s.size() - rest - 1 || denominator == 0.0)
      throw std::invalid_argument("bad angle: " + text);
  }
  return sign * numerator * std::numbers::pi / denominator;
}

namespace {

double parse_number(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad numeric value for " + key + ": " + value);
  }
}

void apply_config_entry(SweepConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "theta_start") cfg.theta_start = parse_angle(value);
  else if (key == "theta_end") cfg.theta_end = parse_angle(value);
  else if (key == "steps") cfg.steps = static_cast<int>(parse_number(key, value));
  else if (key == "sign") {
    if (value == "+") cfg.signs = SignChoice::plus;
    else if (value == "-") cfg.signs = SignChoice::minus;
    else if (value == "both") cfg.signs = SignChoice::both;
    else throw std::invalid_argument("bad sign value: " + value);
  } else if (key == "level") {
    if (value == "gate") cfg.level = Level::gate;
    else if (value == "pulse") cfg.level = Level::pulse;
    else if (value == "both") cfg.level = Level::both;
    else throw std::invalid_argument("bad level value: " + value);
  } else if (key == "delta") cfg.delta = parse_number(key, value);
  else if (key == "epsilon") cfg.epsilon = parse_number(key, value);
  else if (key == "shots") cfg.shots = static_cast<long long>(parse_number(key, value));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_number(key, value));
  else if (key == "layout") cfg.layout_path = value;
  else {
    SpinSystem probe = cfg.spins;
    if (!apply_spin_config(probe, key, 0.0))
      throw std::invalid_argument("unknown config key: " + key);
    apply_spin_config(cfg.spins, key, parse_number(key, value));
  }
}

}  // namespace

void load_config_file(SweepConfig& cfg, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string key, eq, value;
    std::istringstream ls(line);
    if (!(ls >> key)) continue;
    ls >> eq;
    if (eq == "=") ls >> value;
    else value = eq;
    if (value.empty()) throw std::invalid_argument("config line without value: " + line);
    apply_config_entry(cfg, key, value);
  }
}

std::vector<double> sweep_grid(const SweepConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("sweep needs at least one step");
  std::vector<double> grid;
  if (cfg.steps == 1) {
    grid.push_back(cfg.theta_start);
    return grid;
  }
  const double step = (cfg.theta_end - cfg.theta_start) / (cfg.steps - 1);
  for (int k = 0; k < cfg.steps; ++k) grid.push_back(cfg.theta_start + k * step);
  return grid;
}

Unitary gate_level_unitary(double theta, Sign sign) {
  const Unitary prep = embed_gate(3, ry(sign_value(sign) * theta), {1});
  return build_cloning_unitary(theta) * prep;
}

GateCircuit require_layout(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw MissingCacheError("missing layout cache: " + path +
                            " (run `pqcm find-layout` first)");
  GateCircuit circuit = load_layout(path);
  // Caches are re-verified, never trusted: a stale or edited file must fail
  // loudly rather than feed wrong pulse sequences downstream.
  const double residual = verify_layout(circuit, kDefaultLayoutGrid);
  if (residual > kDefaultLayoutTol)
    throw std::runtime_error("cached layout fails verification (residual " +
                             fmt(residual) + "); delete " + path + " and re-search");
  return circuit;
}

namespace {

Unitary pulse_level_unitary(double theta, Sign sign, const SweepConfig& cfg,
                            const GateCircuit& circuit) {
  PulseSequence seq = full_experiment_sequence(theta, sign, cfg.spins, circuit);
  if (cfg.delta != 0.0) seq = with_amplitude_error(seq, cfg.delta);
  return sequence_propagator(seq, cfg.spins);
}

ExperimentRecord record_for(const Unitary& u, double theta, Sign sign,
                            const SweepConfig& cfg, double reference) {
  const PseudoPureState pps = pseudo_pure(cfg.epsilon).evolved(u);
  return analyze_state(pps, theta, sign, cfg.spins, reference);
}

// Finite-statistics mode: the efficiency becomes a binomial frequency and
// each Bloch component a two-outcome frequency estimate, drawn in a fixed
// order so a seed pins the whole report.
void sample_record(ExperimentRecord& rec, long long shots, std::mt19937_64& rng) {
  auto frequency = [&](double p) {
    p = std::clamp(p, 0.0, 1.0);
    std::binomial_distribution<long long> dist(shots, p);
    return static_cast<double>(dist(rng)) / static_cast<double>(shots);
  };
  rec.gamma_est = frequency(rec.gamma_est);
  for (BlochVector* r : {&rec.bloch_b, &rec.bloch_c})
    for (int c = 0; c < 3; ++c) (*r)(c) = 2.0 * frequency((1.0 + (*r)(c)) / 2.0) - 1.0;
  rec.f_b = fidelity_from_bloch(rec.bloch_b, rec.theta, rec.sign);
  rec.f_c = fidelity_from_bloch(rec.bloch_c, rec.theta, rec.sign);
  rec.rho_b = tomography_single_qubit(rec.bloch_b).rho;
  rec.rho_c = tomography_single_qubit(rec.bloch_c).rho;
}

std::string config_echo(const SweepConfig& cfg) {
  std::string s = "theta_start=" + fmt(cfg.theta_start) +
                  " theta_end=" + fmt(cfg.theta_end) +
                  " steps=" + std::to_string(cfg.steps) +
                  " sign=" + sign_token(cfg.signs) + " level=" + level_token(cfg.level) +
                  " delta=" + fmt(cfg.delta) + " epsilon=" + fmt(cfg.epsilon) +
                  " shots=" + std::to_string(cfg.shots) +
                  " seed=" + std::to_string(cfg.seed);
  s += " J_ab=" + fmt(cfg.spins.j_ab) + " J_bc=" + fmt(cfg.spins.j_bc) +
       " J_ac=" + fmt(cfg.spins.j_ac) + " w_a=" + fmt(cfg.spins.offsets(0)) +
       " w_b=" + fmt(cfg.spins.offsets(1)) + " w_c=" + fmt(cfg.spins.offsets(2));
  return s;
}

bool record_closes(const ExperimentRecord& r) {
  return std::abs(r.gamma_est - r.gamma_theory) <= kPipelineTol &&
         std::abs(r.f_b - 1.0) <= kPipelineTol && std::abs(r.f_c - 1.0) <= kPipelineTol;
}

}  // namespace

RunReport run_sweep(const SweepConfig& cfg) {
  const std::vector<double> grid = sweep_grid(cfg);
  const std::vector<Sign> signs = signs_of(cfg.signs);
  const bool want_gate = cfg.level != Level::pulse;
  const bool want_pulse = cfg.level != Level::gate;

  GateCircuit circuit;
  std::string cache_hash = "none";
  if (want_pulse) {
    circuit = require_layout(cfg.layout_path);
    std::ifstream f(cfg.layout_path);
    std::ostringstream buf;
    buf << f.rdbuf();
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(buf.str())));
    cache_hash = hex;
  }

  const double reference =
      normalization_reference(pseudo_pure(cfg.epsilon), cfg.spins);

  RunReport report;
  std::mt19937_64 rng(cfg.seed);

  std::string csv;
  csv += std::string("# ") + kToolVersion + "\n";
  csv += "# config: " + config_echo(cfg) + "\n";
  csv += "# layout_cache: " + cache_hash + "\n";
  csv += record_csv_header() + "\n";

  auto run_block = [&](Level level, std::vector<ExperimentRecord>& records) {
    csv += "# level: " + level_token(level) + "\n";
    for (double theta : grid) {
      for (Sign sign : signs) {
        const Unitary u = level == Level::gate
                              ? gate_level_unitary(theta, sign)
                              : pulse_level_unitary(theta, sign, cfg, circuit);
        ExperimentRecord rec = record_for(u, theta, sign, cfg, reference);
        if (cfg.shots > 0) sample_record(rec, cfg.shots, rng);
        const bool noise_free = (level == Level::gate || cfg.delta == 0.0);
        if (noise_free && cfg.shots == 0 && !record_closes(rec))
          report.closure_ok = false;
        csv += record_csv_row(rec) + "\n";
        records.push_back(std::move(rec));
      }
    }
  };

  if (want_gate) run_block(Level::gate, report.gate_records);
  if (want_pulse) run_block(Level::pulse, report.pulse_records);
  report.csv = std::move(csv);
  return report;
}

PointReport run_point(const SweepConfig& cfg, double theta, Sign sign, Level level) {
  if (level == Level::both)
    throw std::invalid_argument("run_point expects a single level");

  Unitary u;
  if (level == Level::gate) {
    u = gate_level_unitary(theta, sign);
  } else {
    const GateCircuit circuit = require_layout(cfg.layout_path);
    u = pulse_level_unitary(theta, sign, cfg, circuit);
  }

  const double reference =
      normalization_reference(pseudo_pure(cfg.epsilon), cfg.spins);
  const PseudoPureState evolved = pseudo_pure(cfg.epsilon).evolved(u);

  PointReport report;
  report.level = level;
  report.record = analyze_state(evolved, theta, sign, cfg.spins, reference);
  report.rho_input = pure_density(
      (Eigen::Vector2cd() << std::cos(theta / 2), sign_value(sign) * std::sin(theta / 2))
          .finished());
  report.failure = post_select(u * basis_state(3, 0), 0, 1).state;
  report.signals_b =
      group_signals(peak_integrals(evolved, 1, Acquisition::xy, cfg.spins, reference),
                    peak_integrals(evolved, 1, Acquisition::z, cfg.spins, reference),
                    cfg.spins);
  report.signals_c =
      group_signals(peak_integrals(evolved, 2, Acquisition::xy, cfg.spins, reference),
                    peak_integrals(evolved, 2, Acquisition::z, cfg.spins, reference),
                    cfg.spins);
  return report;
}

namespace {

void print_matrix(std::ostringstream& out, const std::string& name,
                  const DensityMatrix& m) {
  out << "  " << name << ":\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << "    row:";
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << " (" << fmt(m(i, j).real()) << "," << fmt(m(i, j).imag()) << ")";
    out << "\n";
  }
}

void print_signals(std::ostringstream& out, const std::string& name,
                   const GroupedSignals& sig) {
  out << "  " << name << ":\n";
  for (int k = 0; k < 4; ++k) {
    out << "    peak" << k + 1 << " |" << sig.order[k].first << sig.order[k].second
        << ">: x=" << fmt(sig.p(k, 0)) << " y=" << fmt(sig.p(k, 1))
        << " z=" << fmt(sig.p(k, 2)) << "\n";
  }
}

}  // namespace

std::string format_point_report(const PointReport& report) {
  const ExperimentRecord& r = report.record;
  std::ostringstream out;
  out << "record:\n";
  out << "  level: " << level_token(report.level) << "\n";
  out << "  theta: " << fmt(r.theta) << "\n";
  out << "  sign: " << (r.sign == Sign::plus ? "+" : "-") << "\n";
  out << "  gamma_theory: " << fmt(r.gamma_theory) << "\n";
  out << "  gamma_est: " << fmt(r.gamma_est) << "\n";
  out << "  F_b: " << fmt(r.f_b) << "\n";
  out << "  F_c: " << fmt(r.f_c) << "\n";
  out << "  bloch_b: (" << fmt(r.bloch_b(0)) << ", " << fmt(r.bloch_b(1)) << ", "
      << fmt(r.bloch_b(2)) << ")\n";
  out << "  bloch_c: (" << fmt(r.bloch_c(0)) << ", " << fmt(r.bloch_c(1)) << ", "
      << fmt(r.bloch_c(2)) << ")\n";
  print_matrix(out, "rho_input", report.rho_input);
  print_matrix(out, "rho_b", r.rho_b);
  print_matrix(out, "rho_c", r.rho_c);
  if (report.failure) {
    out << "  failure_branch:";
    for (Eigen::Index i = 0; i < report.failure->size(); ++i)
      out << " (" << fmt((*report.failure)(i).real()) << ","
          << fmt((*report.failure)(i).imag()) << ")";
    out << "\n";
  } else {
    out << "  failure_branch: empty branch\n";
  }
  print_signals(out, "signals_b", report.signals_b);
  print_signals(out, "signals_c", report.signals_c);
  return out.str();
}

LayoutReport find_or_verify_layout(const std::string& path,
                                   const std::vector<double>& grid, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  LayoutReport report;
  if (std::filesystem::exists(path)) {
    report.from_cache = true;
    report.circuit = load_layout(path);
    report.verify_residual = verify_layout(report.circuit, grid);
    if (report.verify_residual > tol)
      throw std::runtime_error("cached layout fails verification (residual " +
                               fmt(report.verify_residual) + " > tol " + fmt(tol) +
                               "); delete " + path + " to re-search");
  } else {
    report.search = search_figure_layout(grid, tol);
    if (report.search.found) {
      report.circuit = report.search.circuit;
      report.verify_residual = verify_layout(report.circuit, grid);
      save_layout(path, report.search, grid, tol);
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

CalibrationResult calibrate_noise(const SweepConfig& base, double delta_max,
                                  int scan_steps) {
  const GateCircuit circuit = require_layout(base.layout_path);
  SweepConfig cfg = base;
  cfg.level = Level::pulse;
  cfg.signs = SignChoice::both;
  cfg.shots = 0;
  const std::vector<double> grid = sweep_grid(cfg);
  const double reference =
      normalization_reference(pseudo_pure(cfg.epsilon), cfg.spins);

  auto mean_infidelity = [&](double delta) {
    cfg.delta = delta;
    double sum = 0.0;
    int n = 0;
    for (double theta : grid) {
      for (Sign sign : {Sign::plus, Sign::minus}) {
        const Unitary u = pulse_level_unitary(theta, sign, cfg, circuit);
        const ExperimentRecord rec = record_for(u, theta, sign, cfg, reference);
        sum += (1.0 - rec.f_b) + (1.0 - rec.f_c);
        n += 2;
      }
    }
    return sum / n;
  };

  CalibrationResult result;
  constexpr double kTargetInfidelity = 0.02;  // centre of the [0.01, 0.03] band
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < scan_steps; ++k) {
    const double delta = delta_max * k / (scan_steps - 1);
    const double inf = mean_infidelity(delta);
    result.scan.emplace_back(delta, inf);
    if (std::abs(inf - kTargetInfidelity) < best_dist) {
      best_dist = std::abs(inf - kTargetInfidelity);
      result.delta = delta;
      result.mean_infidelity = inf;
    }
  }

  cfg.delta = result.delta;
  const double quarter = std::numbers::pi / 4;
  for (Sign sign : {Sign::plus, Sign::minus}) {
    const Unitary u = pulse_level_unitary(quarter, sign, cfg, circuit);
    const ExperimentRecord rec = record_for(u, quarter, sign, cfg, reference);
    (sign == Sign::plus ? result.f_b_plus : result.f_b_minus) = rec.f_b;
    (sign == Sign::plus ? result.f_c_plus : result.f_c_minus) = rec.f_c;
  }
  const auto in_unit = [](double f) { return f >= 0.96 && f < 1.0; };
  result.in_band = result.mean_infidelity >= 0.01 && result.mean_infidelity <= 0.03 &&
                   in_unit(result.f_b_plus) && in_unit(result.f_c_plus) &&
                   in_unit(result.f_b_minus) && in_unit(result.f_c_minus);
  return result;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace pqcm
